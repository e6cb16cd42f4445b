"""Two-sphere Cartesian potential field baseline.

Inside the passive sphere the target's component toward the nearest
obstacle is attenuated linearly with distance; inside the active sphere a
Cartesian repulsion pushes the vehicle away.  Implements the published
description of the comparison method, not its original source.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import AvoidanceParams
from .push_blend import compute_push
from .range_image import PixelView, RangeImage, as_view


@dataclass(frozen=True)
class SpherePfParams:
    d_passive: float
    d_active: float
    v_max: float

    def __post_init__(self):
        if not self.d_active < self.d_passive:
            raise ValueError("need d_active < d_passive")

    @classmethod
    def from_avoidance(cls, params: AvoidanceParams, v_max: float) -> "SpherePfParams":
        """Passive radius matched to the deceleration onset of the
        prediction-based method: d_safe + v_max * t_contact."""
        return cls(params.d_safe + v_max * params.t_contact, params.d_safe, v_max)


def sphere_pf_command(
    history: RangeImage | PixelView,
    v_target: np.ndarray,
    pf: SpherePfParams,
    params: AvoidanceParams,
) -> np.ndarray:
    """Attenuate toward the dominant obstacle, push inside the active sphere.

    The passive sphere removes a fraction of the target's component toward
    the most constraining return, the one maximizing attenuation times
    closing speed (a merely close obstacle that is not being approached,
    like the ground under level flight, imposes no slow-down).  The
    attenuation ramps linearly from 0 at d_passive to a full cancel at
    d_active.  The active push reuses the linear-weight repulsion with the
    active radius as its range.  The sum is speed-capped at v_max.
    """
    v_target = np.asarray(v_target, dtype=float)
    out = v_target.copy()
    view = as_view(history)

    if view.bins.size:
        inside = np.nonzero(view.ranges < pf.d_passive)[0]
        if inside.size:
            atten = np.minimum(
                (pf.d_passive - view.ranges[inside]) / (pf.d_passive - pf.d_active),
                1.0,
            )
            closing = view.directions(inside) @ v_target
            weight = atten * np.maximum(closing, 0.0)
            best = int(np.argmax(weight))
            if weight[best] > 0.0:
                toward = view.directions(inside[best : best + 1])[0]
                out = out - atten[best] * closing[best] * toward
        out = out + compute_push(view, params, radius=pf.d_active)

    speed = float(np.linalg.norm(out))
    if speed > pf.v_max:
        out *= pf.v_max / speed
    return out
