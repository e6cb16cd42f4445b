"""Scan pruning and aggregation into the history range image.

Keeping only the most recent scan is unsafe: thin structures drop out of
single scans and aggressive attitude changes move obstacles outside the
vertical field of view.  The history image aggregates scans over a short
window, warped into the current sensor frame, with per-pixel ages
controlling when a stale return yields to a farther fresh one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import history_merge
from .params import AvoidanceParams
from .range_image import PixelView, RangeImage, RigidMotion, direction_grid, warp


@dataclass
class HistoryState:
    history: RangeImage
    last_update_time: float
    # Compact view of the history, maintained by aggregate() so the
    # direction stage and the predictor skip re-extracting valid pixels.
    view: PixelView | None = None

    @classmethod
    def initial(cls, params: AvoidanceParams, time: float = 0.0) -> "HistoryState":
        return cls(RangeImage.empty(params.geometry), time)


def prune_scan(scan: RangeImage, v0, params: AvoidanceParams) -> RangeImage:
    """Invalidate returns that cannot be reached within the look-ahead.

    A pixel is kept iff its range is at most ``prune_radius(|v0|)``, the
    ball over-approximation of all positions reachable under +-a_max for
    t_history + t_contact seconds, padded by d_safe.
    """
    radius = params.prune_radius(float(np.linalg.norm(v0)))
    out = scan.copy()
    far = out.ranges > radius
    out.ranges[far] = 0.0
    out.ages[far] = 0.0
    return out


def aggregate(
    state: HistoryState,
    scan: RangeImage,
    motion_since_last: RigidMotion,
    now: float,
    params: AvoidanceParams,
) -> HistoryState:
    """Merge a (pruned) scan into the warped, aged history.

    Steps: warp the history into the new sensor frame, advance all ages by
    the elapsed time, evict pixels older than t_history, then merge per
    pixel: the history return survives only while
    ``r_hist * exp(age / tau) <= r_scan``; otherwise the scan value enters
    with age zero.  Scan-only pixels enter fresh; history-only pixels
    persist until eviction.
    """
    if now < state.last_update_time:
        raise ValueError("aggregation time went backwards")
    hist = warp(state.history, motion_since_last)
    geom = hist.geometry
    size = geom.width * geom.height
    pts = np.empty((size, 3))
    r = np.empty(size)
    ages = np.empty(size)
    bins = np.empty(size, dtype=np.int64)
    count = history_merge(
        hist.ranges.reshape(-1),
        hist.ages.reshape(-1),
        scan.ranges.reshape(-1),
        now - state.last_update_time,
        params.t_history,
        params.tau,
        direction_grid(geom).reshape(-1, 3),
        pts, r, ages, bins,
    )
    view = PixelView(
        geom, bins[:count], r[:count], ages[:count], points=pts[:count]
    )
    return HistoryState(hist, now, view)
