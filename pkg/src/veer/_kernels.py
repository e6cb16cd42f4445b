"""Numba kernels for the per-pixel hot paths.

The expensive projection trigonometry runs as a parallel map whose output
slots are indexed by source point, so thread scheduling cannot change the
result.  Scattering stays serial in source order, which makes collision
resolution (and therefore every downstream reduction) bit-reproducible.
A range of 0.0 marks an invalid pixel throughout.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

_warmed = False


def warmup() -> None:
    """Compile or cache-load every kernel once on tiny inputs.

    Long-running entry points call this up front so the first real tick
    does not absorb the one-time JIT cost.
    """
    global _warmed
    if _warmed:
        return
    pts = np.array([[1.0, 0.0, 0.0], [0.0, 2.0, 0.5]])
    r = np.array([1.0, 2.06])
    ages = np.zeros(2)
    bins = np.empty(2, dtype=np.int64)
    out_r = np.empty(2)
    project_shifted(pts, r, 0.1, 0.0, 0.0, 0.1, 8, 4, -0.7, 0.785, 0.35,
                    -0.644, 0.644, 1e300, bins, out_r)
    scratch = np.zeros(32)
    scatter_compact(bins, out_r, scratch, bins.copy(), out_r.copy())
    scatter_min(np.maximum(bins, 0), r, ages, np.zeros(32), np.zeros(32))
    gather_valid(np.zeros(32), np.zeros(32), np.zeros((32, 3)),
                 np.empty((32, 3)), np.empty(32), np.empty(32),
                 np.empty(32, dtype=np.int64))
    history_merge(np.zeros(32), np.zeros(32), np.zeros(32), 0.05, 1.0, 1.44,
                  np.zeros((32, 3)), np.empty((32, 3)), np.empty(32),
                  np.empty(32), np.empty(32, dtype=np.int64))
    acc = np.empty(7)
    field_forces(np.maximum(bins, 0), r, np.zeros((32, 3)), np.zeros(8),
                 np.zeros(4), 8, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0,
                 1.5, 2.0, 1.5, True, acc)
    raycast(np.zeros(3), pts, np.array([[2.0, -1.0, 0, 0, 0, 0, 0]]), out_r)
    _warmed = True


@njit(cache=True, fastmath=False)
def field_forces(
    bins, ranges, dirs_flat, phi_centers, theta_centers, width,
    vx, vy, vz, speed, phi_target, theta_target,
    t_contact, d_min_contact, d_safe, velocity_support,
    out,
):
    """Accumulate the angular forces of every pixel on the target pixel.

    Per pixel: the support radius from the velocity-adjusted range, the
    wrapped angular distance to the target and the repulsive force; sums,
    minima and maxima per axis go to ``out`` as [sum_phi, min_phi,
    max_phi, sum_theta, min_theta, max_theta, count].  Iteration order is
    the (deterministic) order of ``bins``.  fastmath stays off so the
    accumulation order is exactly reproducible.
    """
    pi = np.pi
    two_pi = 2.0 * np.pi
    half_pi = 0.5 * np.pi
    if velocity_support:
        reach = d_safe + max(t_contact * speed, d_min_contact)
    else:
        reach = d_safe
    sum_phi = 0.0
    min_phi = np.inf
    max_phi = -np.inf
    sum_theta = 0.0
    min_theta = np.inf
    max_theta = -np.inf
    count = 0
    for i in range(bins.shape[0]):
        r = ranges[i]
        if r >= reach:
            continue
        b = bins[i]
        # The force vanishes beyond the support and the support never
        # exceeds pi/2, so far-off-target pixels skip the dot product.
        dphi = phi_target - phi_centers[b % width]
        dphi = pi - (pi - dphi) % two_pi  # shorter arc, ties toward +phi
        dtheta = theta_target - theta_centers[b // width]
        dist = np.hypot(dphi, dtheta)
        if dist > half_pi:
            continue
        if velocity_support:
            v_toward = (
                dirs_flat[b, 0] * vx + dirs_flat[b, 1] * vy + dirs_flat[b, 2] * vz
            )
            d_contact = t_contact * v_toward
            if d_contact < d_min_contact:
                d_contact = d_min_contact
            r_vel = r - d_contact
        else:
            r_vel = r
        if r_vel >= d_safe:
            continue
        support = np.arctan2(d_safe, r_vel) if r_vel > 0.0 else half_pi
        if dist > support:
            continue
        if dist == 0.0:
            f_phi = 0.0
            f_theta = support  # coincident pixel: deterministic upward tie-break
        else:
            scale = (support - dist) / dist
            f_phi = scale * dphi
            f_theta = scale * dtheta
        sum_phi += f_phi
        sum_theta += f_theta
        if f_phi < min_phi:
            min_phi = f_phi
        if f_phi > max_phi:
            max_phi = f_phi
        if f_theta < min_theta:
            min_theta = f_theta
        if f_theta > max_theta:
            max_theta = f_theta
        count += 1
    out[0] = sum_phi
    out[1] = min_phi
    out[2] = max_phi
    out[3] = sum_theta
    out[4] = min_theta
    out[5] = max_theta
    out[6] = count


@njit(cache=True)
def scatter_min(flat_idx, ranges, ages, out_ranges, out_ages):
    """Scatter ranges into flat image planes keeping the smaller range.

    On collisions the smaller range wins and brings its age along; ties
    keep the earlier source.  Entries with a negative index are skipped.
    """
    for i in range(flat_idx.shape[0]):
        j = flat_idx[i]
        if j < 0:
            continue
        r = ranges[i]
        cur = out_ranges[j]
        if cur == 0.0 or r < cur:
            out_ranges[j] = r
            out_ages[j] = ages[i]


@njit(cache=True)
def gather_valid(flat_ranges, flat_ages, dirs_flat, out_pts, out_r, out_age, out_bins):
    """Extract valid pixels in row-major order as 3D points plus planes."""
    count = 0
    for b in range(flat_ranges.shape[0]):
        r = flat_ranges[b]
        if r > 0.0:
            out_pts[count, 0] = dirs_flat[b, 0] * r
            out_pts[count, 1] = dirs_flat[b, 1] * r
            out_pts[count, 2] = dirs_flat[b, 2] * r
            out_r[count] = r
            out_age[count] = flat_ages[b]
            out_bins[count] = b
            count += 1
    return count


@njit(cache=True)
def history_merge(
    hist_r, hist_age, scan_r, elapsed, t_history, tau,
    dirs_flat, out_pts, out_r, out_age, out_bins,
):
    """Age, evict and merge the warped history with the current scan.

    In place on the history planes: ages advance by ``elapsed``, pixels
    older than ``t_history`` are evicted, then the scan replaces a pixel
    (entering with age zero) unless the aged history return is still
    credibly closer: r_hist * exp(age / tau) <= r_scan keeps the history,
    equality included.  The surviving pixels are also emitted compactly
    (row-major) as 3D points and planes; returns their count.
    """
    count = 0
    for b in range(hist_r.shape[0]):
        rh = hist_r[b]
        if rh > 0.0:
            age = hist_age[b] + elapsed
            if age > t_history:
                rh = 0.0
                hist_r[b] = 0.0
                hist_age[b] = 0.0
            else:
                hist_age[b] = age
        rs = scan_r[b]
        if rs > 0.0:
            if rh <= 0.0 or rh * np.exp(hist_age[b] / tau) > rs:
                hist_r[b] = rs
                hist_age[b] = 0.0
        r = hist_r[b]
        if r > 0.0:
            out_pts[count, 0] = dirs_flat[b, 0] * r
            out_pts[count, 1] = dirs_flat[b, 1] * r
            out_pts[count, 2] = dirs_flat[b, 2] * r
            out_r[count] = r
            out_age[count] = hist_age[b]
            out_bins[count] = b
            count += 1
    return count


@njit(parallel=True, fastmath=True, cache=True)
def project_shifted(
    points, source_ranges, shift_x, shift_y, shift_z, shift_norm,
    width, height, theta_min, dphi, dtheta, sin_lo, sin_hi, reach,
    out_bins, out_ranges,
):
    """Project 3D returns seen from a shifted origin onto flat bin ids.

    Writes -1 for points behind the origin, outside the vertical FoV or
    farther than ``reach`` (callers drop far pixels only when downstream
    consumers provably ignore them).  Points whose source range
    lower-bounds the shifted range at or beyond reach (triangle
    inequality) skip the projection entirely.  Returns the minimum in-FoV
    range over the non-skipped points, 1e300 when none.  Because fastmath
    removes inf semantics, reach and shift_norm must be finite: pass
    1e300 for "bin everything" and 1e300 to disable the skip.
    """
    pi = np.pi
    d_near = 1e300
    for i in prange(points.shape[0]):
        if source_ranges[i] - shift_norm >= reach:
            out_bins[i] = -1
            out_ranges[i] = 0.0
            continue
        x = points[i, 0] - shift_x
        y = points[i, 1] - shift_y
        z = points[i, 2] - shift_z
        r = np.sqrt(x * x + y * y + z * z)
        if r <= 0.0:
            out_bins[i] = -1
            out_ranges[i] = 0.0
            continue
        s = z / r
        if s > 1.0:
            s = 1.0
        elif s < -1.0:
            s = -1.0
        if s < sin_lo or s > sin_hi:
            out_bins[i] = -1
            out_ranges[i] = 0.0
            continue
        d_near = min(d_near, r)
        if r >= reach:
            out_bins[i] = -1
            out_ranges[i] = 0.0
            continue
        row = int((np.arcsin(s) - theta_min) / dtheta)
        if row >= height:
            row = height - 1
        elif row < 0:
            row = 0
        col = int((np.arctan2(y, x) + pi) / dphi)
        if col >= width:
            col -= width
        elif col < 0:
            col += width
        out_bins[i] = row * width + col
        out_ranges[i] = r
    return d_near


@njit(parallel=True, fastmath=True, cache=True)
def raycast(origin, dirs, prims, out_ranges):
    """Nearest-hit ranges for one ray per pixel against encoded primitives.

    ``prims`` rows are [kind, a, b, c, d, e, f] with kind 0 = box
    (center, half extents), 1 = sphere (center, radius), 2 = ground
    half-space (height).  Misses produce 0.0 (the invalid sentinel).
    Sentinels are finite because fastmath removes inf semantics.
    """
    no_hit = 1e300
    n_prims = prims.shape[0]
    for i in prange(dirs.shape[0]):
        dx = dirs[i, 0]
        dy = dirs[i, 1]
        dz = dirs[i, 2]
        best = no_hit
        for p in range(n_prims):
            kind = prims[p, 0]
            if kind == 0.0:
                t_near = -no_hit
                t_far = no_hit
                ok = True
                for axis in range(3):
                    o = origin[axis]
                    d = dx if axis == 0 else (dy if axis == 1 else dz)
                    lo = prims[p, 1 + axis] - prims[p, 4 + axis]
                    hi = prims[p, 1 + axis] + prims[p, 4 + axis]
                    if d == 0.0:
                        if o < lo or o > hi:
                            ok = False
                            break
                    else:
                        t1 = (lo - o) / d
                        t2 = (hi - o) / d
                        if t1 > t2:
                            t1, t2 = t2, t1
                        if t1 > t_near:
                            t_near = t1
                        if t2 < t_far:
                            t_far = t2
                if ok and t_near <= t_far and t_near > 0.0 and t_near < best:
                    best = t_near
            elif kind == 1.0:
                ocx = origin[0] - prims[p, 1]
                ocy = origin[1] - prims[p, 2]
                ocz = origin[2] - prims[p, 3]
                b = dx * ocx + dy * ocy + dz * ocz
                c = ocx * ocx + ocy * ocy + ocz * ocz - prims[p, 4] * prims[p, 4]
                disc = b * b - c
                if disc >= 0.0:
                    t = -b - np.sqrt(disc)
                    if 0.0 < t < best:
                        best = t
            else:
                if dz != 0.0:
                    t = (prims[p, 1] - origin[2]) / dz
                    if 0.0 < t < best:
                        best = t
        out_ranges[i] = 0.0 if best == no_hit else best


@njit(cache=True)
def scatter_compact(bins, ranges, scratch, out_bins, out_ranges):
    """Min-scatter projected points and emit the touched bins compactly.

    ``scratch`` must be an all-zero flat image plane; it is restored to
    zero before returning.  Output order is first-touch order, which is a
    deterministic function of the input order.  Returns (count, d_near).
    """
    count = 0
    d_near = np.inf
    for i in range(bins.shape[0]):
        b = bins[i]
        if b < 0:
            continue
        r = ranges[i]
        cur = scratch[b]
        if cur == 0.0:
            scratch[b] = r
            out_bins[count] = b
            count += 1
        elif r < cur:
            scratch[b] = r
        if r < d_near:
            d_near = r
    for k in range(count):
        out_ranges[k] = scratch[out_bins[k]]
        scratch[out_bins[k]] = 0.0
    return count, d_near
