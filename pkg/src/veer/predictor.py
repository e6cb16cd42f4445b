"""Velocity-magnitude selection by closed-loop trajectory prediction.

The future is unrolled by iterating {direction stage -> motion model ->
image warp} at the scan period.  If the predicted trajectory enters the
safety shell before the contact horizon, the command is scaled so the
shell is reached no earlier than t_contact.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from ._kernels import project_shifted, scatter_compact
from .params import AvoidanceParams
from .pipeline import direction_command
from .push_blend import compute_push
from .range_image import PixelView, RangeImage, as_view

# Minimum per-step clearance gain for the escape check.
_ESCAPE_GAIN = 1e-6


class StopReason(enum.Enum):
    HORIZON_REACHED = "horizon_reached"
    SAFETY_BREACH = "safety_breach"
    ALREADY_INSIDE = "already_inside"


@dataclass
class PredictionStep:
    t: float
    position: np.ndarray
    velocity: np.ndarray
    command: np.ndarray
    d_near: float


@dataclass
class PredictionTrace:
    steps: list[PredictionStep]
    stop_reason: StopReason
    t_stop: float
    d_near_initial: float = math.inf

    def to_text(self) -> str:
        """One step per line: t x y z vx vy vz cx cy cz d_near."""
        lines = [f"# stop_reason={self.stop_reason.value} t_stop={self.t_stop:.9g}"]
        for s in self.steps:
            vals = [s.t, *s.position, *s.velocity, *s.command, s.d_near]
            lines.append(" ".join(f"{v:.9g}" for v in vals))
        return "\n".join(lines) + "\n"


def step_axis(v0: float, v_cmd: float, dt: float, a_max: float) -> tuple[float, float]:
    """Single-axis response of a controller that slews at full acceleration.

    Accelerates toward v_cmd at a_max until it is reached, then holds it.
    Returns (position delta, velocity) after dt.
    """
    t_accel = abs(v_cmd - v0) / a_max
    a = math.copysign(a_max, v_cmd - v0) if v_cmd != v0 else 0.0
    ta = min(t_accel, dt)
    p = ta * v0 + 0.5 * ta * ta * a + max(dt - t_accel, 0.0) * v_cmd
    v = v0 + ta * a
    return p, v


def step_state(
    position: np.ndarray, velocity: np.ndarray, cmd: np.ndarray, dt: float, a_max: float
) -> tuple[np.ndarray, np.ndarray]:
    """Advance a point-mass state by one period, each axis independent."""
    pos = np.array(position, dtype=float)
    vel = np.empty(3)
    for i in range(3):
        dp, vel[i] = step_axis(float(velocity[i]), float(cmd[i]), dt, a_max)
        pos[i] += dp
    return pos, vel


def unroll(
    history: RangeImage | PixelView,
    v_cmd0: np.ndarray,
    v0: np.ndarray,
    params: AvoidanceParams,
    stop_on_breach: bool = True,
) -> PredictionTrace:
    """Predict the closed-loop future in the initial sensor frame.

    Step k applies the previous command to the motion model, shifts the
    history returns by the accumulated displacement, rebins them and runs
    the direction stage on the predicted image to obtain the next command
    (k = 0 uses the provided pipeline output; later commands feed back as
    the target of the next stage).  Stops at the contact horizon or, when
    ``stop_on_breach``, as soon as the predicted clearance drops below
    d_safe.  With the initial clearance already inside d_safe no steps are
    taken and the trace reports ALREADY_INSIDE.
    """
    source = as_view(history)
    d_initial = source.min_range()
    if stop_on_breach and d_initial < params.d_safe:
        return PredictionTrace([], StopReason.ALREADY_INSIDE, 0.0, d_initial)

    points = source.point_cloud()
    n_points = points.shape[0]
    geom = source.geometry
    sin_lo, sin_hi = math.sin(geom.theta_min), math.sin(geom.theta_max)
    # Buffers reused across steps; the direction stage consumes the view
    # within the step and never holds on to it.
    bins_buf = np.empty(n_points, dtype=np.int64)
    r_buf = np.empty(n_points)
    out_bins = np.empty(n_points, dtype=np.int64)
    out_r = np.empty(n_points)
    scratch = np.zeros(geom.width * geom.height)

    pos = np.zeros(3)
    vel = np.asarray(v0, dtype=float).copy()
    cmd = np.asarray(v_cmd0, dtype=float).copy()
    view = PixelView(geom, out_bins[:0], out_r[:0])
    steps: list[PredictionStep] = []

    n = params.prediction_steps
    for k in range(n):
        if k > 0:
            outcome = direction_command(view, cmd, vel, params)
            cmd = outcome.command
        pos, vel = step_state(pos, vel, cmd, params.dt, params.a_max)
        t = (k + 1) * params.dt

        # Re-warp the original history by the accumulated displacement
        # instead of chaining per-step warps: same transform, but the
        # quantization error does not compound.  Pixels beyond the field
        # reach cannot influence the direction stage (zero support), the
        # push radius or the breach test, so the kernel drops them; the
        # returned minimum still covers the full image.
        if n_points:
            speed = math.sqrt(float(vel @ vel))
            reach = params.d_safe + max(
                params.t_contact * speed, params.d_min_contact
            ) + 0.01
            shift_norm = math.sqrt(float(pos @ pos))
            d_near = project_shifted(
                points, source.ranges, pos[0], pos[1], pos[2], shift_norm,
                geom.width, geom.height, geom.theta_min, geom.dphi, geom.dtheta,
                sin_lo, sin_hi, reach,
                bins_buf, r_buf,
            )
            if d_near >= reach:
                # Nothing within reach: redo without the range shortcut so
                # the recorded minimum is the exact image minimum.
                d_near = project_shifted(
                    points, source.ranges, pos[0], pos[1], pos[2], 1e300,
                    geom.width, geom.height, geom.theta_min, geom.dphi, geom.dtheta,
                    sin_lo, sin_hi, reach,
                    bins_buf, r_buf,
                )
            if d_near >= 1e299:
                d_near = math.inf
            count, _ = scatter_compact(bins_buf, r_buf, scratch, out_bins, out_r)
            view = PixelView(geom, out_bins[:count], out_r[:count], d_near_hint=float(d_near))
        else:
            d_near = math.inf

        steps.append(PredictionStep(t, pos.copy(), vel.copy(), cmd.copy(), float(d_near)))
        if stop_on_breach and d_near < params.d_safe:
            return PredictionTrace(steps, StopReason.SAFETY_BREACH, t, d_initial)
    return PredictionTrace(steps, StopReason.HORIZON_REACHED, params.t_contact, d_initial)


def escape_clearance_grows(trace: PredictionTrace) -> bool:
    """Whether predicted clearance strictly increases on every step."""
    prev = trace.d_near_initial
    if not trace.steps:
        return False
    for step in trace.steps:
        if not step.d_near > prev + _ESCAPE_GAIN:
            return False
        prev = step.d_near
    return True


def scale_command(
    trace: PredictionTrace,
    v_cmd0: np.ndarray,
    params: AvoidanceParams,
    escape_trace: PredictionTrace | None = None,
    push: np.ndarray | None = None,
) -> np.ndarray:
    """Scale the command so the safety shell is not reached before t_contact.

    A full-horizon trace passes the command through; a breach at t scales
    it by t / t_contact.  When already inside the shell the time-to-contact
    logic does not apply: the command runs unscaled only if the dedicated
    escape unroll shows clearance growing every step, otherwise the slow
    push-out (OVERRIDE output) takes over.
    """
    v_cmd0 = np.asarray(v_cmd0, dtype=float)
    if trace.stop_reason is StopReason.HORIZON_REACHED:
        return v_cmd0.copy()
    if trace.stop_reason is StopReason.SAFETY_BREACH:
        return v_cmd0 * (trace.t_stop / params.t_contact)
    if escape_trace is None or push is None:
        raise ValueError("ALREADY_INSIDE scaling needs the escape trace and push force")
    if escape_clearance_grows(escape_trace):
        return v_cmd0.copy()
    return np.asarray(push, dtype=float).copy()


def choose_velocity(
    history: RangeImage | PixelView,
    v_cmd0: np.ndarray,
    v0: np.ndarray,
    params: AvoidanceParams,
) -> tuple[np.ndarray, PredictionTrace]:
    """Run the prediction and return (final command, primary trace)."""
    view = as_view(history)
    trace = unroll(view, v_cmd0, v0, params)
    if trace.stop_reason is not StopReason.ALREADY_INSIDE:
        return scale_command(trace, v_cmd0, params), trace
    escape = unroll(view, v_cmd0, v0, params, stop_on_breach=False)
    push = compute_push(view, params)
    return scale_command(trace, v_cmd0, params, escape, push), trace


def projection_ttc_scale(
    history: RangeImage | PixelView, v_cmd0: np.ndarray, params: AvoidanceParams
) -> np.ndarray:
    """Prediction-free fallback: time-to-contact from velocity projections.

    For every return the commanded velocity is projected onto the obstacle
    direction; the tightest (range - d_safe) / projection bounds the
    contact time and scales the command like the unrolled variant would.
    Returns the vehicle is moving away from impose no bound.
    """
    v_cmd0 = np.asarray(v_cmd0, dtype=float)
    view = as_view(history)
    if view.ranges.size == 0:
        return v_cmd0.copy()
    v_proj = (view.point_cloud() / view.ranges[:, None]) @ v_cmd0
    closing = v_proj > 1e-9
    if not closing.any():
        return v_cmd0.copy()
    t_min = float(((view.ranges[closing] - params.d_safe) / v_proj[closing]).min())
    return v_cmd0 * min(max(t_min / params.t_contact, 0.0), 1.0)
