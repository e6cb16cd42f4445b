"""Range-image snapshot files for golden-test fixtures.

Byte layout (little-endian, no padding):

    offset  size        field
    0       4           magic b"VRI1"
    4       4           uint32 width
    8       4           uint32 height
    12      8           float64 theta_min [rad]
    20      8           float64 theta_max [rad]
    28      8*W*H       float64 ranges, row-major (row 0 = theta_min edge)
    28+8WH  8*W*H       float64 ages, row-major

A range of 0.0 is the invalid sentinel.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .params import ImageGeometry
from .range_image import RangeImage

_MAGIC = b"VRI1"
_HEADER = struct.Struct("<4sIIdd")


def save_snapshot(img: RangeImage, path: str | Path) -> None:
    geom = img.geometry
    header = _HEADER.pack(_MAGIC, geom.width, geom.height, geom.theta_min, geom.theta_max)
    body = (
        np.ascontiguousarray(img.ranges, dtype="<f8").tobytes()
        + np.ascontiguousarray(img.ages, dtype="<f8").tobytes()
    )
    Path(path).write_bytes(header + body)


def load_snapshot(path: str | Path) -> RangeImage:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated snapshot header")
    magic, width, height, theta_min, theta_max = _HEADER.unpack_from(raw)
    if magic != _MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    geom = ImageGeometry(width=width, height=height, theta_min=theta_min, theta_max=theta_max)
    plane = width * height * 8
    expected = _HEADER.size + 2 * plane
    if len(raw) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, got {len(raw)}")
    ranges = np.frombuffer(raw, dtype="<f8", count=width * height, offset=_HEADER.size)
    ages = np.frombuffer(raw, dtype="<f8", count=width * height, offset=_HEADER.size + plane)
    return RangeImage(
        geom,
        ranges.reshape(height, width).astype(float),
        ages.reshape(height, width).astype(float),
    )
