"""Scenario configuration: scene, start state, params and command source.

Configs are YAML documents; unknown keys are ignored so older runners can
read newer files.  Bundled scenarios live in the package's ``scenarios/``
directory and can be referenced by bare name from the CLI.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .controller import Method
from .params import AvoidanceParams, ImageGeometry
from .sim_world import Box, Ground, Scene, Sphere, UavState


class ScenarioError(ValueError):
    """Configuration file did not parse or validate."""


@dataclass
class StallRule:
    window: float = 10.0
    min_displacement: float = 0.5
    min_goal_distance: float = 2.0


@dataclass
class CommandConfig:
    source: str = "waypoints"  # waypoints | script | random | teleop
    speed: float = 3.0
    waypoints: list[np.ndarray] = field(default_factory=list)
    arrive_radius: float = 1.5
    resample_period: float = 10.0
    target_lo: np.ndarray | None = None
    target_hi: np.ndarray | None = None
    script: list[tuple[float, np.ndarray]] = field(default_factory=list)


@dataclass
class Scenario:
    name: str
    scene: Scene
    start: UavState
    params: AvoidanceParams
    command: CommandConfig
    method: Method = Method.ANGULAR
    seed: int = 0
    uav_radius: float = 0.3
    max_time: float = 60.0
    stall: StallRule = field(default_factory=StallRule)
    noise_sigma: float = 0.0


def _require(mapping: dict, key: str, context: str):
    if key not in mapping:
        raise ScenarioError(f"{context}: missing required field '{key}'")
    return mapping[key]


def _parse_primitive(entry: dict, index: int):
    kind = _require(entry, "type", f"scene.primitives[{index}]")
    try:
        if kind == "box":
            return Box(entry["center"], entry["size"])
        if kind == "sphere":
            return Sphere(entry["center"], entry["radius"])
        if kind == "ground":
            return Ground(float(entry.get("height", 0.0)))
    except (KeyError, ValueError) as exc:
        raise ScenarioError(f"scene.primitives[{index}]: {exc}") from exc
    raise ScenarioError(f"scene.primitives[{index}]: unknown type '{kind}'")


def _parse_geometry(data: dict) -> ImageGeometry:
    return ImageGeometry(
        width=int(data.get("width", 512)),
        height=int(data.get("height", 128)),
        theta_min=float(data.get("theta_min", -math.pi / 4)),
        theta_max=float(data.get("theta_max", math.pi / 4)),
    )


def _parse_params(data: dict, geometry: ImageGeometry) -> AvoidanceParams:
    known = {
        "d_safe", "d_close", "a_max", "t_contact", "d_min_contact",
        "t_history", "tau", "v_push", "accel_limit_near_close", "dt",
    }
    kwargs = {k: float(v) for k, v in data.items() if k in known}
    try:
        return AvoidanceParams(geometry=geometry, **kwargs)
    except ValueError as exc:
        raise ScenarioError(f"params: {exc}") from exc


def _parse_command(data: dict) -> CommandConfig:
    cfg = CommandConfig()
    cfg.source = str(data.get("source", "waypoints"))
    if cfg.source not in ("waypoints", "script", "random", "teleop"):
        raise ScenarioError(f"command.source '{cfg.source}' unknown")
    cfg.speed = float(data.get("speed", 3.0))
    cfg.arrive_radius = float(data.get("arrive_radius", 1.5))
    cfg.resample_period = float(data.get("resample_period", 10.0))
    cfg.waypoints = [np.asarray(w, dtype=float) for w in data.get("waypoints", [])]
    if cfg.source == "waypoints" and not cfg.waypoints:
        raise ScenarioError("command.source waypoints needs a waypoints list")
    if "target_range" in data:
        lo, hi = data["target_range"]
        cfg.target_lo = np.asarray(lo, dtype=float)
        cfg.target_hi = np.asarray(hi, dtype=float)
    cfg.script = [
        (float(e["t"]), np.asarray(e["v"], dtype=float)) for e in data.get("script", [])
    ]
    if cfg.source == "script" and not cfg.script:
        raise ScenarioError("command.source script needs a script list")
    return cfg


def parse_scenario(data: dict, name: str = "scenario") -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError(f"{name}: document root must be a mapping")
    geometry = _parse_geometry(data.get("geometry", {}))
    params = _parse_params(data.get("params", {}), geometry)

    scene_data = data.get("scene", {})
    primitives = [
        _parse_primitive(entry, i)
        for i, entry in enumerate(scene_data.get("primitives", []))
    ]
    bounds = scene_data.get("bounds")
    if bounds is not None:
        scene = Scene(primitives, np.asarray(bounds[0]), np.asarray(bounds[1]))
    else:
        scene = Scene(primitives)

    uav = data.get("uav", {})
    start = UavState(
        np.asarray(uav.get("start", [0.0, 0.0, 2.0]), dtype=float),
        np.asarray(uav.get("velocity", [0.0, 0.0, 0.0]), dtype=float),
    )
    if not scene.in_bounds(start.position):
        raise ScenarioError("uav.start outside scene bounds")

    stall_data = data.get("stall", {})
    stall = StallRule(
        window=float(stall_data.get("window", 10.0)),
        min_displacement=float(stall_data.get("min_displacement", 0.5)),
        min_goal_distance=float(stall_data.get("min_goal_distance", 2.0)),
    )

    try:
        method = Method(str(data.get("method", "angular")))
    except ValueError as exc:
        raise ScenarioError(f"method: {exc}") from exc

    return Scenario(
        name=str(data.get("name", name)),
        scene=scene,
        start=start,
        params=params,
        command=_parse_command(data.get("command", {})),
        method=method,
        seed=int(data.get("seed", 0)),
        uav_radius=float(data.get("uav_radius", 0.3)),
        max_time=float(data.get("max_time", 60.0)),
        stall=stall,
        noise_sigma=float(data.get("noise", {}).get("range_sigma", 0.0)),
    )


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc
    return parse_scenario(data, name=path.stem)


def bundled_scenario_path(name: str) -> Path:
    """Resolve a bundled scenario by bare name (e.g. 'gap')."""
    root = resources.files("veer").joinpath("scenarios")
    candidate = root.joinpath(f"{name}.yaml")
    if not candidate.is_file():
        available = sorted(p.stem for p in root.iterdir() if p.name.endswith(".yaml"))
        raise ScenarioError(f"no bundled scenario '{name}'; available: {available}")
    return Path(str(candidate))


def resolve_scenario(ref: str | Path) -> Scenario:
    """Load a scenario from a path, falling back to the bundled set."""
    path = Path(ref)
    if path.is_file():
        return load_scenario(path)
    return load_scenario(bundled_scenario_path(str(ref)))


class CommandSource:
    """Produces the target velocity for each tick; tracks the active goal."""

    def __init__(self, cfg: CommandConfig, scenario: Scenario):
        self.cfg = cfg
        self.rng = np.random.default_rng(scenario.seed)
        self._wp_index = 0
        self._random_target: np.ndarray | None = None
        self._next_resample = 0.0
        self.reached_goals: list[float] = []  # distance to goal at each goal switch

    def goal(self, position: np.ndarray, time: float) -> np.ndarray | None:
        cfg = self.cfg
        if cfg.source == "waypoints":
            if self._wp_index >= len(cfg.waypoints):
                return None
            return cfg.waypoints[self._wp_index]
        if cfg.source == "random":
            return self._random_target
        return None

    def finished(self) -> bool:
        return self.cfg.source == "waypoints" and self._wp_index >= len(self.cfg.waypoints)

    def target_velocity(self, position: np.ndarray, time: float) -> np.ndarray:
        cfg = self.cfg
        if cfg.source == "script":
            v = np.zeros(3)
            for t_cmd, vec in cfg.script:
                if time >= t_cmd - 1e-9:
                    v = vec
            return v.copy()
        if cfg.source == "random":
            if self._random_target is None or time >= self._next_resample - 1e-9:
                if self._random_target is not None:
                    self.reached_goals.append(
                        float(np.linalg.norm(self._random_target - position))
                    )
                lo = cfg.target_lo if cfg.target_lo is not None else np.full(3, -20.0)
                hi = cfg.target_hi if cfg.target_hi is not None else np.full(3, 20.0)
                self._random_target = self.rng.uniform(lo, hi)
                self._next_resample = time + cfg.resample_period
            return self._toward(self._random_target, position)
        if cfg.source == "waypoints":
            while self._wp_index < len(cfg.waypoints):
                wp = cfg.waypoints[self._wp_index]
                dist = float(np.linalg.norm(wp - position))
                if dist > cfg.arrive_radius:
                    return self._toward(wp, position)
                self.reached_goals.append(dist)
                self._wp_index += 1
            return np.zeros(3)
        return np.zeros(3)  # teleop: target injected externally

    def final_goal_distance(self, position: np.ndarray) -> float | None:
        goal = None
        if self.cfg.source == "waypoints" and self.cfg.waypoints:
            goal = self.cfg.waypoints[-1] if self.finished() else self.cfg.waypoints[self._wp_index]
        elif self.cfg.source == "random":
            goal = self._random_target
        if goal is None:
            return None
        return float(np.linalg.norm(goal - position))

    def _toward(self, goal: np.ndarray, position: np.ndarray) -> np.ndarray:
        delta = goal - position
        dist = float(np.linalg.norm(delta))
        if dist < 1e-9:
            return np.zeros(3)
        return delta * (self.cfg.speed / dist)
