"""Near-obstacle regime: Cartesian push force, blending, acceleration cap.

The angular field rotates commands by at most 90 degrees, which cannot
move the vehicle away from an obstacle it is already next to.  Inside the
safety shell a slow Cartesian push takes over: fully below d_close, blended
into the target command between d_close and d_safe.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .params import AvoidanceParams
from .range_image import PixelView, RangeImage, as_view


class Regime(enum.Enum):
    FREE = "free"
    BLEND = "blend"
    OVERRIDE = "override"


@dataclass
class RegimeDecision:
    regime: Regime
    d_near: float


def decide_regime(d_near: float, params: AvoidanceParams) -> RegimeDecision:
    if d_near >= params.d_safe:
        return RegimeDecision(Regime.FREE, d_near)
    if d_near > params.d_close:
        return RegimeDecision(Regime.BLEND, d_near)
    return RegimeDecision(Regime.OVERRIDE, d_near)


def compute_push(
    history: RangeImage | PixelView,
    params: AvoidanceParams,
    radius: float | None = None,
) -> np.ndarray:
    """Slow escape velocity away from everything inside the safety shell.

    Per-pixel forces point away from the return and grow linearly to unit
    weight at contact; the sum is normalized and scaled to v_push, so a
    single obstacle always pushes at exactly v_push.  Exactly cancelling
    forces (or no near pixels) give the zero vector.
    """
    if radius is None:
        radius = params.d_safe
    view = as_view(history)
    near = np.nonzero(view.ranges < radius)[0]
    if near.size == 0:
        return np.zeros(3)
    weights = (radius - view.ranges[near]) / radius
    total = -(view.directions(near) * weights[:, None]).sum(axis=0)
    norm = float(np.linalg.norm(total))
    # Cancelling forces leave rounding dust; normalizing that would
    # fabricate a full-strength push in an arbitrary direction.
    if norm <= 1e-9:
        return np.zeros(3)
    return total * (params.v_push / norm)


def blend(v_target: np.ndarray, push: np.ndarray, regime: RegimeDecision) -> np.ndarray:
    """Combine target command and push force according to the regime.

    FREE passes the target through, OVERRIDE discards it entirely.  BLEND
    adds the push force and removes the part of the target that steers
    into the push direction, so aligned commands cannot speed the vehicle
    up: the blended component along the push direction is exactly |push|.
    """
    v_target = np.asarray(v_target, dtype=float)
    if regime.regime is Regime.FREE:
        return v_target.copy()
    if regime.regime is Regime.OVERRIDE:
        return np.asarray(push, dtype=float).copy()
    push_norm = float(np.linalg.norm(push))
    if push_norm == 0.0:
        return v_target.copy()
    push_dir = np.asarray(push, dtype=float) / push_norm
    return v_target + push - float(v_target @ push_dir) * push_dir


def limit_acceleration(
    prev_cmd: np.ndarray, new_cmd: np.ndarray, d_near: float, params: AvoidanceParams
) -> np.ndarray:
    """Cap the per-tick command change near obstacles.

    Active whenever the nearest obstacle is inside d_safe; prevents the
    oscillation of being commanded into the safety shell and pushed out
    again.
    """
    new_cmd = np.asarray(new_cmd, dtype=float)
    if d_near >= params.d_safe:
        return new_cmd.copy()
    delta = new_cmd - np.asarray(prev_cmd, dtype=float)
    step = float(np.linalg.norm(delta))
    if step <= params.accel_limit_near_close:
        return new_cmd.copy()
    return np.asarray(prev_cmd, dtype=float) + delta * (params.accel_limit_near_close / step)
