"""One-shot direction stage: regime logic, push blending, angular field.

This is the per-image command generator shared by the live control loop
and every step of the trajectory unroll.  Speed selection happens later.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .angular_field import DirectionResult, adjust_direction
from .params import AvoidanceParams
from .push_blend import Regime, RegimeDecision, blend, compute_push, decide_regime
from .range_image import PixelView, RangeImage, as_view


@dataclass
class DirectionOutcome:
    """Unscaled velocity command plus the telemetry the UI and tests need."""

    command: np.ndarray
    regime: RegimeDecision
    push: np.ndarray
    direction: DirectionResult | None
    field_input: np.ndarray | None
    field_rotation: float | None  # rad between angular-field input and output

    @property
    def d_near(self) -> float:
        return self.regime.d_near


def _angle_between(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return math.acos(max(-1.0, min(1.0, float(a @ b) / (na * nb))))


def direction_command(
    history: RangeImage | PixelView,
    v_target: np.ndarray,
    v_current: np.ndarray,
    params: AvoidanceParams,
) -> DirectionOutcome:
    """Compute the adjusted, still unscaled velocity command for one image.

    OVERRIDE (closest return inside d_close) discards the target and
    returns the push force.  Otherwise the (possibly blended) target is
    deflected by the angular field and rescaled to its own magnitude, so
    the field changes direction only.
    """
    view = as_view(history)
    v_target = np.asarray(v_target, dtype=float)
    regime = decide_regime(view.min_range(), params)
    push = (
        compute_push(view, params)
        if regime.regime is not Regime.FREE
        else np.zeros(3)
    )
    if regime.regime is Regime.OVERRIDE:
        return DirectionOutcome(push.copy(), regime, push, None, None, None)

    v_in = blend(v_target, push, regime)
    speed = float(np.linalg.norm(v_in))
    if speed == 0.0:
        return DirectionOutcome(np.zeros(3), regime, push, None, None, None)
    result = adjust_direction(view, v_in, v_current, params)
    return DirectionOutcome(
        result.direction * speed,
        regime,
        push,
        result,
        v_in,
        _angle_between(v_in, result.direction),
    )
