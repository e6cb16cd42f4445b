import math

import numpy as np
import pytest

from veer.params import AvoidanceParams, ImageGeometry
from veer.range_image import RangeImage


@pytest.fixture
def default_geom():
    return ImageGeometry()


@pytest.fixture
def default_params():
    return AvoidanceParams()


@pytest.fixture
def centered_geom():
    """Odd-sized grid so (phi=0, theta=0) is an exact pixel center."""
    return ImageGeometry(width=511, height=127)


def make_image(geom, pixels):
    """Build a range image from {(row, col): range} or (row, col, r, age)."""
    img = RangeImage.empty(geom)
    for entry in pixels:
        if len(entry) == 3:
            row, col, r = entry
            age = 0.0
        else:
            row, col, r, age = entry
        img.ranges[row, col] = r
        img.ages[row, col] = age
    return img


def wall_image(geom, distance, half_width=math.inf, half_height=math.inf):
    """Range image of an infinite plane x = distance (sensor at origin).

    Pixels whose ray never crosses the plane stay invalid; optional
    half-extents bound the plane patch in y and z.
    """
    from veer.range_image import direction_grid

    dirs = direction_grid(geom)
    img = RangeImage.empty(geom)
    toward = dirs[:, :, 0] > 1e-9
    with np.errstate(divide="ignore"):
        t = np.where(toward, distance / dirs[:, :, 0], 0.0)
    hit = toward & (np.abs(t * dirs[:, :, 1]) <= half_width) & (
        np.abs(t * dirs[:, :, 2]) <= half_height
    )
    img.ranges[hit] = t[hit]
    return img
