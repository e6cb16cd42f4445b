"""Range-image geometry: pixel/angle/3D conversions and rigid warping.

The image stores one range per (elevation, azimuth) bin plus the age of
the housed measurement.  A range of exactly 0.0 is the reserved invalid
sentinel, so validity tests stay branch-free (``ranges > 0``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._kernels import gather_valid, project_shifted, scatter_min
from .params import ImageGeometry

INVALID_RANGE = 0.0


def wrap_angle(delta: float) -> float:
    """Wrap an angle difference to the shorter arc in (-pi, pi].

    Ties at exactly pi resolve toward positive azimuth.
    """
    return math.pi - (math.pi - delta) % (2.0 * math.pi)


def wrap_phi(phi):
    """Normalize an azimuth to [-pi, pi)."""
    return (phi + math.pi) % (2.0 * math.pi) - math.pi


@lru_cache(maxsize=16)
def _grids(geom: ImageGeometry):
    """Per-geometry pixel-center angles and unit directions, cached."""
    phi = -math.pi + (np.arange(geom.width) + 0.5) * geom.dphi
    theta = geom.theta_min + (np.arange(geom.height) + 0.5) * geom.dtheta
    cos_t = np.cos(theta)[:, None]
    dirs = np.empty((geom.height, geom.width, 3))
    dirs[:, :, 0] = cos_t * np.cos(phi)[None, :]
    dirs[:, :, 1] = cos_t * np.sin(phi)[None, :]
    dirs[:, :, 2] = np.sin(theta)[:, None]
    return phi, theta, dirs


def phi_centers(geom: ImageGeometry) -> np.ndarray:
    return _grids(geom)[0]


def theta_centers(geom: ImageGeometry) -> np.ndarray:
    return _grids(geom)[1]


def direction_grid(geom: ImageGeometry) -> np.ndarray:
    """Unit ray direction per pixel center, shape (height, width, 3)."""
    return _grids(geom)[2]


@dataclass
class RangeImage:
    """Azimuth/elevation grid of ranges with per-pixel measurement age."""

    geometry: ImageGeometry
    ranges: np.ndarray  # (height, width), meters, 0.0 = invalid
    ages: np.ndarray  # (height, width), seconds since measurement

    @classmethod
    def empty(cls, geom: ImageGeometry) -> "RangeImage":
        return cls(geom, np.zeros(geom.shape), np.zeros(geom.shape))

    def copy(self) -> "RangeImage":
        return RangeImage(self.geometry, self.ranges.copy(), self.ages.copy())

    @property
    def valid_mask(self) -> np.ndarray:
        return self.ranges > 0.0

    def valid_count(self) -> int:
        return int(np.count_nonzero(self.ranges))

    def min_range(self) -> float:
        """Smallest valid range, +inf when the image is empty."""
        valid = self.ranges[self.ranges > 0.0]
        return float(valid.min()) if valid.size else math.inf

    def valid_points(self):
        """Valid pixels as (points (N,3), ranges (N,), ages (N,)) in row-major order."""
        pts, r, ages, _ = _gathered(self)
        return pts, r, ages


@dataclass
class PixelView:
    """Compact view of the valid pixels of a range image.

    ``bins`` are flat row-major indices (row * width + col) in a fixed,
    deterministic order; the live path lists them in row-major order, the
    unroll path in first-touch scatter order.
    """

    geometry: ImageGeometry
    bins: np.ndarray
    ranges: np.ndarray
    ages: np.ndarray | None = None
    # The unroll culls pixels beyond the field reach but still knows the
    # true image minimum; the hint keeps min_range() exact in that case.
    d_near_hint: float | None = None
    points: np.ndarray | None = None

    @classmethod
    def from_image(cls, img: RangeImage) -> "PixelView":
        pts, r, ages, bins = _gathered(img)
        return cls(img.geometry, bins, r, ages, points=pts)

    def point_cloud(self) -> np.ndarray:
        """3D returns of the view's pixels, computed and cached on demand."""
        if self.points is None:
            dirs = direction_grid(self.geometry).reshape(-1, 3)[self.bins]
            self.points = dirs * self.ranges[:, None]
        return self.points

    @property
    def rows(self) -> np.ndarray:
        return self.bins // self.geometry.width

    @property
    def cols(self) -> np.ndarray:
        return self.bins % self.geometry.width

    def min_range(self) -> float:
        if self.d_near_hint is not None:
            return self.d_near_hint
        return float(self.ranges.min()) if self.ranges.size else math.inf

    def directions(self, subset: np.ndarray | None = None) -> np.ndarray:
        """Pixel-center unit directions, shape (N, 3) or (len(subset), 3)."""
        bins = self.bins if subset is None else self.bins[subset]
        return direction_grid(self.geometry).reshape(-1, 3)[bins]


def _gathered(img: RangeImage):
    """Compact (points, ranges, ages, bins) of the valid pixels, row-major."""
    size = img.ranges.size
    pts = np.empty((size, 3))
    r = np.empty(size)
    ages = np.empty(size)
    bins = np.empty(size, dtype=np.int64)
    count = gather_valid(
        img.ranges.reshape(-1), img.ages.reshape(-1),
        direction_grid(img.geometry).reshape(-1, 3),
        pts, r, ages, bins,
    )
    return pts[:count], r[:count], ages[:count], bins[:count]


def as_view(image_or_view: "RangeImage | PixelView") -> PixelView:
    if isinstance(image_or_view, PixelView):
        return image_or_view
    return PixelView.from_image(image_or_view)


@dataclass(frozen=True, eq=False)
class RigidMotion:
    """Sensor displacement: translation plus proper rotation."""

    translation: np.ndarray
    rotation: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.translation, dtype=float).reshape(3)
        r = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        object.__setattr__(self, "translation", t)
        object.__setattr__(self, "rotation", r)
        if abs(np.linalg.det(r) - 1.0) > 1e-9 or not np.allclose(
            r @ r.T, np.eye(3), atol=1e-9
        ):
            raise ValueError("rotation must be proper orthonormal")

    @classmethod
    def identity(cls) -> "RigidMotion":
        return cls(np.zeros(3), np.eye(3))

    @classmethod
    def from_translation(cls, translation) -> "RigidMotion":
        return cls(np.asarray(translation, dtype=float), np.eye(3))

    def inverse(self) -> "RigidMotion":
        return RigidMotion(-self.rotation.T @ self.translation, self.rotation.T)

    def compose(self, other: "RigidMotion") -> "RigidMotion":
        """Motion equivalent to applying ``other`` first, then ``self``."""
        return RigidMotion(
            self.rotation @ other.translation + self.translation,
            self.rotation @ other.rotation,
        )

    def apply(self, points: np.ndarray) -> np.ndarray:
        return points @ self.rotation.T + self.translation


def pixel_center_angles(geom: ImageGeometry, row: int, col: int) -> tuple[float, float]:
    if not (0 <= row < geom.height and 0 <= col < geom.width):
        raise IndexError(f"pixel ({row}, {col}) outside {geom.shape}")
    return (
        -math.pi + (col + 0.5) * geom.dphi,
        geom.theta_min + (row + 0.5) * geom.dtheta,
    )


def pixel_to_point(img: RangeImage, row: int, col: int) -> np.ndarray | None:
    """Project a pixel onto its 3D return; None for invalid pixels."""
    r = img.ranges[row, col]  # IndexError for out-of-bounds pixels
    if r <= 0.0:
        return None
    phi, theta = pixel_center_angles(img.geometry, row, col)
    cos_t = math.cos(theta)
    return r * np.array([cos_t * math.cos(phi), cos_t * math.sin(phi), math.sin(theta)])


def point_to_angles(point) -> tuple[float, float]:
    """Spherical direction (phi, theta) of a nonzero 3D point.

    phi = atan2(y, x) in [-pi, pi), theta = pi/2 - acos(z / |p|).  The
    atan2(0, 0) = 0 convention makes the poles well-defined.
    """
    x, y, z = float(point[0]), float(point[1]), float(point[2])
    norm = math.sqrt(x * x + y * y + z * z)
    if norm == 0.0:
        raise ValueError("zero vector has no direction")
    phi = math.atan2(y, x)
    if phi == math.pi:
        phi = -math.pi
    theta = 0.5 * math.pi - math.acos(max(-1.0, min(1.0, z / norm)))
    return phi, theta


def angles_to_pixel(geom: ImageGeometry, phi: float, theta: float) -> tuple[int, int] | None:
    """Nearest-bin quantization; None when theta leaves the vertical FoV.

    Azimuth wraps modulo 2*pi.  Bins are half-open, so pixel centers are
    exact fixed points of the quantization.
    """
    if theta < geom.theta_min or theta > geom.theta_max:
        return None
    row = int((theta - geom.theta_min) / geom.dtheta)
    if row >= geom.height:
        row = geom.height - 1
    col = int((wrap_phi(phi) + math.pi) / geom.dphi) % geom.width
    return row, col


def warp(img: RangeImage, motion: RigidMotion) -> RangeImage:
    """Re-express a range image in a sensor frame displaced by ``motion``.

    Forward scatter: every valid return is lifted to 3D, transformed by
    the inverse motion (world fixed, sensor moved) and reprojected.  Bin
    collisions keep the smaller range together with its age; bins without
    a contributor come out invalid.
    """
    out = RangeImage.empty(img.geometry)
    pts, r, src_ages, _ = _gathered(img)
    if r.size == 0:
        return out
    geom = img.geometry

    if (motion.rotation == np.eye(3)).all():
        # Pure translation: reuse the fast projection kernel.
        bins = np.empty(r.shape[0], dtype=np.int64)
        r_new = np.empty(r.shape[0])
        t = motion.translation
        project_shifted(
            pts, r, t[0], t[1], t[2], float(np.linalg.norm(t)),
            geom.width, geom.height, geom.theta_min, geom.dphi, geom.dtheta,
            math.sin(geom.theta_min), math.sin(geom.theta_max), 1e300,
            bins, r_new,
        )
        scatter_min(
            bins, r_new, src_ages,
            out.ranges.reshape(-1), out.ages.reshape(-1),
        )
        return out

    q = (pts - motion.translation) @ motion.rotation
    r_new = np.sqrt(np.einsum("ij,ij->i", q, q))
    keep = r_new > 0.0
    q, r_new = q[keep], r_new[keep]
    ages = src_ages[keep]

    theta = np.arcsin(np.clip(q[:, 2] / r_new, -1.0, 1.0))
    in_fov = (theta >= geom.theta_min) & (theta <= geom.theta_max)
    q, r_new, ages, theta = q[in_fov], r_new[in_fov], ages[in_fov], theta[in_fov]
    if r_new.size == 0:
        return out

    new_rows = np.minimum(
        ((theta - geom.theta_min) / geom.dtheta).astype(np.int64), geom.height - 1
    )
    phi = np.arctan2(q[:, 1], q[:, 0])
    new_cols = ((phi + math.pi) / geom.dphi).astype(np.int64) % geom.width
    flat = new_rows * geom.width + new_cols
    scatter_min(flat, r_new, ages, out.ranges.reshape(-1), out.ages.reshape(-1))
    return out
