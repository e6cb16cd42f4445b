"""Parameter ledger shared by the whole avoidance stack."""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class ImageGeometry:
    """Uniform azimuth/elevation grid of a spinning 3D LiDAR.

    Azimuth covers [-pi, pi) with ``width`` bins, elevation covers
    [theta_min, theta_max] with ``height`` bins.  Pixel (row, col) is
    centered at ``(theta_min + (row + 0.5) * dtheta, -pi + (col + 0.5) * dphi)``;
    row 0 is the lowest elevation, col 0 is azimuth -pi.
    """

    width: int = 512
    height: int = 128
    theta_min: float = -math.pi / 4
    theta_max: float = math.pi / 4

    def __post_init__(self):
        if self.width < 4 or self.height < 2:
            raise ValueError(f"geometry too small: {self.width}x{self.height}")
        if not self.theta_min < self.theta_max:
            raise ValueError("theta_min must be below theta_max")
        if self.theta_max - self.theta_min > math.pi + 1e-12:
            raise ValueError("vertical field of view exceeds pi")

    @property
    def dphi(self) -> float:
        return 2.0 * math.pi / self.width

    @property
    def dtheta(self) -> float:
        return (self.theta_max - self.theta_min) / self.height

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)


# Growth-rate default makes the history replacement threshold double over
# one full history window.
_LN2 = math.log(2.0)


@dataclass(frozen=True)
class AvoidanceParams:
    """All tunables of the avoidance pipeline, in SI units.

    Defaults reproduce the evaluation setup: safety shell 1.5 m, close
    shell 1.0 m, 2 m/s^2 acceleration, 1.5 s contact horizon, 2 m minimum
    contact distance, 1 s scan history at 20 Hz.
    """

    d_safe: float = 1.5
    d_close: float = 1.0
    a_max: float = 2.0
    t_contact: float = 1.5
    d_min_contact: float = 2.0
    t_history: float = 1.0
    tau: float | None = None
    v_push: float = 0.5
    accel_limit_near_close: float = 0.25
    dt: float = 0.05
    velocity_support: bool = True
    geometry: ImageGeometry = field(default_factory=ImageGeometry)

    def __post_init__(self):
        if not 0.0 < self.d_close < self.d_safe:
            raise ValueError("need 0 < d_close < d_safe")
        if self.a_max <= 0.0 or self.t_contact <= 0.0 or self.dt <= 0.0:
            raise ValueError("a_max, t_contact and dt must be positive")
        if self.d_min_contact <= 0.0:
            raise ValueError("d_min_contact must be positive")
        if self.t_history < 0.0:
            raise ValueError("t_history must be non-negative")
        if self.tau is None:
            base = self.t_history if self.t_history > 0.0 else 1.0
            object.__setattr__(self, "tau", base / _LN2)
        if self.tau <= 0.0:
            raise ValueError("tau must be positive")

    def prune_radius(self, speed: float) -> float:
        """Worst-case reachable distance plus safety margin.

        Ball over-approximation of the positions reachable from the current
        state within ``t_history + t_contact`` under accelerations up to
        ``a_max``, padded by ``d_safe``.
        """
        t = self.t_history + self.t_contact
        return abs(speed) * t + 0.5 * self.a_max * t * t + self.d_safe

    @property
    def prediction_steps(self) -> int:
        return max(1, math.ceil(self.t_contact / self.dt - 1e-9))
