"""Angular potential field: direction selection on the range image.

Classic Cartesian repulsive forces both deflect and decelerate, which
cancels the command in gaps between obstacles.  Working in image (angle)
coordinates instead, each obstacle pixel repels the target pixel without
touching the speed: opposing deflections cancel and guide the command
toward the center of the gap.  Speed is assigned later by the predictor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import field_forces
from .params import AvoidanceParams
from .range_image import (
    PixelView,
    RangeImage,
    as_view,
    direction_grid,
    phi_centers,
    point_to_angles,
    theta_centers,
    wrap_angle,
    wrap_phi,
)


@dataclass
class AngularForce:
    dphi: float
    dtheta: float


@dataclass
class DirectionResult:
    """Unit flight direction after field deflection and FoV clamping."""

    direction: np.ndarray
    angular_offset_applied: AngularForce
    fov_clipped: bool


def contact_distance(v_toward: float, params: AvoidanceParams) -> float:
    """Predicted travel toward an obstacle before the command takes effect.

    Lower-bounded by d_min_contact so stationary hovering still produces
    direction changes.
    """
    return max(params.t_contact * v_toward, params.d_min_contact)


def support_radius(r: float, v_toward: float, params: AvoidanceParams) -> float:
    """Angular radius within which an obstacle pixel exerts force.

    The support is the image-space projection of the d_safe sphere at the
    velocity-adjusted obstacle range ``r_vel = r - d_contact``: approach
    speed virtually moves the obstacle closer, enlarging the deflection.
    Far obstacles (r_vel >= d_safe) have no support; obstacles at or
    inside the predicted contact point repel from everywhere (pi/2).
    """
    if r <= 0.0:
        raise ValueError("range must be positive")
    if params.velocity_support:
        r_vel = r - contact_distance(v_toward, params)
    else:
        r_vel = r
    if r_vel >= params.d_safe:
        return 0.0
    if r_vel > 0.0:
        return math.atan2(params.d_safe, r_vel)
    return 0.5 * math.pi


def repulsive_force(
    p_obs: tuple[float, float], p_prime: tuple[float, float], d_support: float
) -> AngularForce:
    """Angular force an obstacle pixel exerts on pixel ``p_prime``.

    Magnitude (d_support - d) at angular distance d, directed from the
    obstacle toward p_prime; zero outside the support.  Azimuth distance
    uses the shorter arc.  The singular coincident case (d = 0) breaks the
    tie upward with the full support magnitude so runs stay reproducible.
    """
    if not 0.0 <= d_support <= 0.5 * math.pi + 1e-12:
        raise ValueError("support radius outside [0, pi/2]")
    dphi = wrap_angle(p_prime[0] - p_obs[0])
    dtheta = p_prime[1] - p_obs[1]
    d = math.hypot(dphi, dtheta)
    if d > d_support or d_support == 0.0:
        return AngularForce(0.0, 0.0)
    if d == 0.0:
        return AngularForce(0.0, d_support)
    scale = (d_support - d) / d
    return AngularForce(scale * dphi, scale * dtheta)


def _field_offset(
    view: PixelView,
    phi_target: float,
    theta_target: float,
    v_current: np.ndarray,
    params: AvoidanceParams,
) -> tuple[float, float]:
    """Clipped sum of all pixel forces acting on the target direction."""
    if view.bins.size == 0:
        return 0.0, 0.0
    geom = view.geometry
    v = np.asarray(v_current, dtype=float)
    acc = np.empty(7)
    field_forces(
        view.bins, view.ranges,
        direction_grid(geom).reshape(-1, 3), phi_centers(geom), theta_centers(geom),
        geom.width,
        v[0], v[1], v[2], float(np.linalg.norm(v)),
        phi_target, theta_target,
        params.t_contact, params.d_min_contact, params.d_safe,
        params.velocity_support,
        acc,
    )
    if acc[6] == 0.0:
        return 0.0, 0.0
    off_phi = min(max(acc[0], acc[1]), acc[2])
    off_theta = min(max(acc[3], acc[4]), acc[5])
    return off_phi, off_theta


def adjust_direction(
    history: RangeImage | PixelView,
    v_target: np.ndarray,
    v_current: np.ndarray,
    params: AvoidanceParams,
) -> DirectionResult:
    """Deflect the commanded direction away from obstacles.

    Projects the target command into the image, accumulates the angular
    forces of every valid pixel on the target pixel, clips the sum per
    axis into [min force, max force] (unbounded pile-up from extended
    obstacles would otherwise destabilize the command), adds the offset
    and clamps the elevation to the vertical FoV.
    """
    view = as_view(history)
    phi_t, theta_t = point_to_angles(v_target)  # raises on zero targets
    off_phi, off_theta = _field_offset(view, phi_t, theta_t, v_current, params)

    geom = view.geometry
    phi_out = wrap_phi(phi_t + off_phi)
    theta_out = theta_t + off_theta
    clipped = not geom.theta_min <= theta_out <= geom.theta_max
    theta_out = min(max(theta_out, geom.theta_min), geom.theta_max)

    cos_t = math.cos(theta_out)
    direction = np.array(
        [cos_t * math.cos(phi_out), cos_t * math.sin(phi_out), math.sin(theta_out)]
    )
    return DirectionResult(direction, AngularForce(off_phi, off_theta), clipped)
