"""Teleoperation bridge: live simulator state out, human commands in.

One background task drives the simulation at a configurable multiple of
real time.  The latest client command becomes the target velocity each
tick and always passes through the full avoidance pipeline; a command
older than the staleness window falls back to hover.  State updates are
broadcast to every connected session as JSON text frames; the message
schema is documented in docs/protocol.md and versioned via the ``v``
field.
"""

from __future__ import annotations

import asyncio
import contextlib
import json
import time
from pathlib import Path
from typing import Any

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import HTMLResponse
from fastapi.staticfiles import StaticFiles

from .controller import AvoidanceController
from .harness import RigidMotion
from .predictor import PredictionTrace
from .scenario import Scenario, ScenarioError, resolve_scenario
from .sim_world import Box, Ground, SensorCollisionError, Sphere, UavState, check_collision, raycast_scan, step_vehicle

PROTOCOL_VERSION = 1
STALE_COMMAND_S = 0.5
RANGE_STRIDE = 4
TRACE_STRIDE = 2

_FALLBACK_PAGE = """<!doctype html>
<html><body style="font-family: sans-serif">
<h3>veer teleop service</h3>
<p>No frontend build found. Build it with <code>npm run build</code> in
<code>frontend/</code>, or connect a client to <code>/session</code>.</p>
</body></html>"""


def _scene_json(scenario: Scenario) -> list[dict[str, Any]]:
    out: list[dict[str, Any]] = []
    for prim in scenario.scene.primitives:
        if isinstance(prim, Box):
            out.append({"type": "box", "center": prim.center.tolist(), "size": prim.size.tolist()})
        elif isinstance(prim, Sphere):
            out.append({"type": "sphere", "center": prim.center.tolist(), "radius": prim.radius})
        elif isinstance(prim, Ground):
            out.append({"type": "ground", "height": prim.height})
    return out


def _downsample_range(ranges: np.ndarray, stride: int) -> list[float]:
    """Min-pool so the wire image never hides the nearest return."""
    h, w = ranges.shape
    h2, w2 = h // stride, w // stride
    blocks = ranges[: h2 * stride, : w2 * stride].reshape(h2, stride, w2, stride)
    filled = np.where(blocks > 0.0, blocks, np.inf).min(axis=(1, 3))
    pooled = np.where(np.isfinite(filled), filled, 0.0)
    return [round(float(v), 2) for v in pooled.reshape(-1)]


def _trace_json(trace: PredictionTrace | None) -> dict[str, Any] | None:
    if trace is None:
        return None
    steps = trace.steps[::TRACE_STRIDE]
    if trace.steps and (not steps or steps[-1] is not trace.steps[-1]):
        steps = steps + [trace.steps[-1]]
    return {
        "stop_reason": trace.stop_reason.value,
        "t_stop": round(trace.t_stop, 4),
        "steps": [
            {
                "t": round(s.t, 4),
                "p": [round(float(x), 3) for x in s.position],
                "d_near": round(s.d_near, 3) if np.isfinite(s.d_near) else None,
            }
            for s in steps
        ],
    }


class TeleopSession:
    """Owns the simulator and controller; stepped by the service loop."""

    def __init__(self, scenario: Scenario, rate_multiplier: float = 1.0):
        from ._kernels import warmup

        warmup()  # keep the one-time JIT cost out of the first tick
        self.rate_multiplier = rate_multiplier
        self._load(scenario)

    def _load(self, scenario: Scenario) -> None:
        self.scenario = scenario
        self.params = scenario.params
        self.controller = AvoidanceController(
            self.params, scenario.method, v_max=scenario.command.speed
        )
        self.state = UavState(scenario.start.position.copy(), scenario.start.velocity.copy())
        self._prev_position = self.state.position.copy()
        self.tick_count = 0
        self.collided = False
        self.paused = False
        self._command = np.zeros(3)
        self._command_stamp = -np.inf
        self._rng = np.random.default_rng(scenario.seed + 1)

    def submit_command(self, velocity: np.ndarray, wall_time: float | None = None) -> None:
        """Last-writer-wins mailbox for the client's target velocity."""
        self._command = np.asarray(velocity, dtype=float).reshape(3)
        self._command_stamp = time.monotonic() if wall_time is None else wall_time

    def control(self, action: str, name: str | None = None, multiplier: float | None = None) -> None:
        if action == "pause":
            self.paused = True
        elif action == "resume":
            self.paused = False
        elif action == "reset":
            self._load(self.scenario)
        elif action == "speed":
            if multiplier is None or not 0.01 <= multiplier <= 100.0:
                raise ValueError("speed needs a multiplier in [0.01, 100]")
            self.rate_multiplier = multiplier
        elif action == "load":
            if not name:
                raise ValueError("load needs a scenario name")
            self._load(resolve_scenario(name))
        else:
            raise ValueError(f"unknown control action '{action}'")

    def target_velocity(self, wall_time: float | None = None) -> np.ndarray:
        now = time.monotonic() if wall_time is None else wall_time
        if now - self._command_stamp > STALE_COMMAND_S:
            return np.zeros(3)
        return self._command.copy()

    def hello_message(self) -> dict[str, Any]:
        geom = self.params.geometry
        return {
            "type": "hello",
            "v": PROTOCOL_VERSION,
            "scenario": self.scenario.name,
            "geometry": {
                "width": geom.width,
                "height": geom.height,
                "theta_min": geom.theta_min,
                "theta_max": geom.theta_max,
            },
            "params": {
                "d_safe": self.params.d_safe,
                "d_close": self.params.d_close,
                "a_max": self.params.a_max,
                "t_contact": self.params.t_contact,
                "dt": self.params.dt,
            },
            "scene": _scene_json(self.scenario),
            "bounds": [
                self.scenario.scene.bounds_lo.tolist(),
                self.scenario.scene.bounds_hi.tolist(),
            ],
            "uav_radius": self.scenario.uav_radius,
            "max_speed": self.scenario.command.speed,
        }

    def tick(self, wall_time: float | None = None) -> dict[str, Any]:
        """Advance one control period and build the state update frame."""
        target = self.target_velocity(wall_time)
        if not self.collided and not self.paused:
            try:
                scan = raycast_scan(
                    self.scenario.scene, self.state, self.params.geometry,
                    self._rng, self.scenario.noise_sigma,
                )
            except SensorCollisionError:
                self.collided = True
                return self._state_message(target, None, None)
            motion = RigidMotion.from_translation(self.state.position - self._prev_position)
            self._prev_position = self.state.position.copy()
            result = self.controller.update(
                scan, target, self.state.velocity, motion, self.state.time
            )
            self.state = step_vehicle(
                self.state, result.command, self.params.dt, self.params.a_max
            )
            self.tick_count += 1
            collided, _ = check_collision(
                self.scenario.scene, self.state, self.scenario.uav_radius
            )
            self.collided = collided
            return self._state_message(target, result, result.history)
        return self._state_message(target, None, None)

    def _state_message(self, target, result, history) -> dict[str, Any]:
        outcome = result.outcome if result else None
        msg: dict[str, Any] = {
            "type": "state",
            "v": PROTOCOL_VERSION,
            "tick": self.tick_count,
            "t": round(self.state.time, 4),
            "position": [round(float(x), 4) for x in self.state.position],
            "velocity": [round(float(x), 4) for x in self.state.velocity],
            "target": [round(float(x), 4) for x in target],
            "command": [round(float(x), 4) for x in (result.command if result else np.zeros(3))],
            "regime": outcome.regime.regime.value if outcome else None,
            "d_near": (
                round(outcome.d_near, 3)
                if outcome and np.isfinite(outcome.d_near)
                else None
            ),
            "trace": _trace_json(result.trace if result else None),
            "collided": self.collided,
            "paused": self.paused,
            "speed": self.rate_multiplier,
        }
        if history is not None:
            geom = history.geometry
            msg["range"] = {
                "width": geom.width // RANGE_STRIDE,
                "height": geom.height // RANGE_STRIDE,
                "stride": RANGE_STRIDE,
                "theta_min": geom.theta_min,
                "theta_max": geom.theta_max,
                "data": _downsample_range(history.ranges, RANGE_STRIDE),
            }
        return msg


def _parse_client_frame(raw: str) -> dict[str, Any]:
    try:
        msg = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ValueError(f"not valid JSON: {exc}") from exc
    if not isinstance(msg, dict) or "type" not in msg:
        raise ValueError("frame must be an object with a 'type' field")
    return msg


def create_app(scenario: Scenario, rate_multiplier: float = 1.0) -> FastAPI:
    session = TeleopSession(scenario, rate_multiplier)
    clients: set[WebSocket] = set()

    async def sim_loop() -> None:
        while True:
            start = time.monotonic()
            msg = await asyncio.to_thread(session.tick)
            payload = json.dumps(msg)
            for ws in list(clients):
                try:
                    await ws.send_text(payload)
                except Exception:
                    clients.discard(ws)
            elapsed = time.monotonic() - start
            period = session.params.dt / session.rate_multiplier
            await asyncio.sleep(max(period - elapsed, 0.0))

    @contextlib.asynccontextmanager
    async def lifespan(app: FastAPI):
        task = asyncio.create_task(sim_loop())
        try:
            yield
        finally:
            task.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await task

    app = FastAPI(lifespan=lifespan)
    app.state.session = session

    @app.websocket("/session")
    async def session_socket(ws: WebSocket) -> None:
        await ws.accept()
        await ws.send_text(json.dumps(session.hello_message()))
        clients.add(ws)
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = _parse_client_frame(raw)
                    if msg["type"] == "command":
                        vel = np.asarray(msg["velocity"], dtype=float).reshape(3)
                        if not np.isfinite(vel).all():
                            raise ValueError("velocity must be finite")
                        session.submit_command(vel)
                    elif msg["type"] == "control":
                        session.control(
                            str(msg.get("action", "")),
                            msg.get("name"),
                            msg.get("multiplier"),
                        )
                    else:
                        raise ValueError(f"unknown frame type '{msg['type']}'")
                except (ValueError, KeyError, TypeError) as exc:
                    await ws.send_text(
                        json.dumps({"type": "error", "v": PROTOCOL_VERSION, "message": str(exc)})
                    )
        except WebSocketDisconnect:
            pass
        finally:
            clients.discard(ws)

    dist = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if dist.is_dir():
        app.mount("/", StaticFiles(directory=dist, html=True), name="ui")
    else:
        @app.get("/")
        async def index() -> HTMLResponse:
            return HTMLResponse(_FALLBACK_PAGE)

    return app
