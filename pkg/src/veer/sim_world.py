"""Deterministic closed-loop test bed.

Primitive-based scenes, a ray-cast LiDAR synthesizing range images and a
point-mass vehicle that tracks velocity commands with the exact same
per-axis model the predictor assumes, so prediction error in obstacle-free
flight is identically zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import raycast as _raycast_kernel
from .params import ImageGeometry
from .predictor import step_state
from .range_image import RangeImage, direction_grid

_NO_HIT = np.inf


class SensorCollisionError(RuntimeError):
    """Raised when the sensor origin sits inside scene geometry."""


@dataclass(frozen=True)
class Box:
    center: np.ndarray
    size: np.ndarray  # full extents

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float).reshape(3))
        object.__setattr__(self, "size", np.asarray(self.size, dtype=float).reshape(3))
        if not (self.size > 0.0).all():
            raise ValueError("box extents must be positive")

    def signed_distance(self, p: np.ndarray) -> float:
        q = np.abs(p - self.center) - 0.5 * self.size
        outside = np.maximum(q, 0.0)
        return float(np.linalg.norm(outside) + min(q.max(), 0.0))

    def ray_hits(self, origin: np.ndarray, dirs: np.ndarray) -> np.ndarray:
        lo = self.center - 0.5 * self.size
        hi = self.center + 0.5 * self.size
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = (lo - origin) / dirs
            t2 = (hi - origin) / dirs
        # Axes with zero direction hit iff the origin lies inside the slab.
        near = np.where(np.isnan(t1), -np.inf, np.minimum(t1, t2)).max(axis=1)
        far = np.where(np.isnan(t2), np.inf, np.maximum(t1, t2)).min(axis=1)
        inside_slab = (origin >= lo) & (origin <= hi)
        zero_dir = dirs == 0.0
        miss_parallel = (zero_dir & ~inside_slab).any(axis=1)
        hit = (near <= far) & (far > 0.0) & ~miss_parallel & (near > 0.0)
        return np.where(hit, near, _NO_HIT)


@dataclass(frozen=True)
class Sphere:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float).reshape(3))
        if self.radius <= 0.0:
            raise ValueError("sphere radius must be positive")

    def signed_distance(self, p: np.ndarray) -> float:
        return float(np.linalg.norm(p - self.center) - self.radius)

    def ray_hits(self, origin: np.ndarray, dirs: np.ndarray) -> np.ndarray:
        oc = origin - self.center
        b = dirs @ oc
        c = float(oc @ oc) - self.radius**2
        disc = b * b - c
        root = np.sqrt(np.maximum(disc, 0.0))
        t = -b - root
        hit = (disc >= 0.0) & (t > 0.0)
        return np.where(hit, t, _NO_HIT)


@dataclass(frozen=True)
class Ground:
    """Infinite solid half-space below ``height``."""

    height: float = 0.0

    def signed_distance(self, p: np.ndarray) -> float:
        return float(p[2] - self.height)

    def ray_hits(self, origin: np.ndarray, dirs: np.ndarray) -> np.ndarray:
        dz = dirs[:, 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (self.height - origin[2]) / dz
        hit = (dz != 0.0) & (t > 0.0)
        return np.where(hit, t, _NO_HIT)


Primitive = Box | Sphere | Ground


def _encode_primitives(primitives: list[Primitive]) -> np.ndarray:
    rows = np.zeros((len(primitives), 7))
    for i, prim in enumerate(primitives):
        if isinstance(prim, Box):
            rows[i, 0] = 0.0
            rows[i, 1:4] = prim.center
            rows[i, 4:7] = 0.5 * prim.size
        elif isinstance(prim, Sphere):
            rows[i, 0] = 1.0
            rows[i, 1:4] = prim.center
            rows[i, 4] = prim.radius
        else:
            rows[i, 0] = 2.0
            rows[i, 1] = prim.height
    return rows


@dataclass
class Scene:
    primitives: list[Primitive] = field(default_factory=list)
    bounds_lo: np.ndarray = field(default_factory=lambda: np.full(3, -100.0))
    bounds_hi: np.ndarray = field(default_factory=lambda: np.full(3, 100.0))

    def __post_init__(self):
        self.bounds_lo = np.asarray(self.bounds_lo, dtype=float).reshape(3)
        self.bounds_hi = np.asarray(self.bounds_hi, dtype=float).reshape(3)
        self._encoded = _encode_primitives(self.primitives)

    def in_bounds(self, p: np.ndarray) -> bool:
        return bool((p >= self.bounds_lo).all() and (p <= self.bounds_hi).all())

    @property
    def encoded(self) -> np.ndarray:
        if self._encoded.shape[0] != len(self.primitives):
            self._encoded = _encode_primitives(self.primitives)
        return self._encoded


@dataclass
class UavState:
    position: np.ndarray
    velocity: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float).reshape(3)
        self.velocity = np.asarray(self.velocity, dtype=float).reshape(3)


def raycast_scan(
    scene: Scene,
    state: UavState,
    geometry: ImageGeometry,
    rng: np.random.Generator | None = None,
    noise_sigma: float = 0.0,
) -> RangeImage:
    """One ray per pixel center from the sensor origin, axes world-aligned.

    Rays return the nearest primitive hit; misses stay invalid.  All ages
    are zero.  A sensor origin inside (or on) scene geometry raises
    SensorCollisionError.
    """
    origin = state.position
    for prim in scene.primitives:
        if prim.signed_distance(origin) <= 0.0:
            raise SensorCollisionError("sensor origin inside scene geometry")

    geom = geometry
    dirs = direction_grid(geom).reshape(-1, 3)
    ranges = np.empty(dirs.shape[0])
    _raycast_kernel(origin, dirs, scene.encoded, ranges)
    if noise_sigma > 0.0 and rng is not None:
        hit = ranges > 0.0
        ranges[hit] = np.maximum(ranges[hit] + rng.normal(0.0, noise_sigma, hit.sum()), 1e-6)
    return RangeImage(geom, ranges.reshape(geom.shape), np.zeros(geom.shape))


def step_vehicle(state: UavState, cmd: np.ndarray, dt: float, a_max: float) -> UavState:
    """Advance the plant with the identical model the predictor unrolls."""
    pos, vel = step_state(state.position, state.velocity, cmd, dt, a_max)
    return UavState(pos, vel, state.time + dt)


def check_collision(
    scene: Scene, state: UavState, uav_radius: float
) -> tuple[bool, float]:
    """Exact signed clearance to the nearest primitive surface.

    Returns (collided, d_true) with d_true = +inf in an empty scene;
    collision means the surface is within (or past) the vehicle radius.
    """
    if not scene.primitives:
        return False, math.inf
    d_true = min(prim.signed_distance(state.position) for prim in scene.primitives)
    return d_true <= uav_radius, d_true
