"""Angular potential field tests.

Support-radius oracle: d_contact = max(t_contact * v_toward,
d_min_contact), r_vel = r - d_contact, and the piecewise support
atan2(d_safe, r_vel) between the 0 and pi/2 branches.  With defaults
(d_safe 1.5, t_contact 1.5, d_min_contact 2): r = 3, v = 0 gives
r_vel = 1 and support atan2(1.5, 1) = 0.98279 rad.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from veer.angular_field import adjust_direction, repulsive_force, support_radius
from veer.params import AvoidanceParams, ImageGeometry
from veer.range_image import RangeImage, angles_to_pixel, pixel_center_angles

from conftest import make_image

GEOM = ImageGeometry(width=128, height=32)
PARAMS = AvoidanceParams(geometry=GEOM)


class TestSupportRadius:
    def test_far_obstacle_no_support(self):
        # r = 10, v = 0: r_vel = 8 >= d_safe
        assert support_radius(10.0, 0.0, PARAMS) == 0.0

    def test_contact_boundary_full_support(self):
        # r = 2 = d_min_contact: r_vel = 0 -> pi/2 branch
        assert support_radius(2.0, 0.0, PARAMS) == pytest.approx(math.pi / 2)

    def test_mid_branch(self):
        assert support_radius(3.0, 0.0, PARAMS) == pytest.approx(0.982793723, abs=1e-9)

    def test_receding_velocity_shrinks_support(self):
        # negative closing speed is allowed but floored by d_min_contact
        assert support_radius(3.0, -5.0, PARAMS) == support_radius(3.0, 0.0, PARAMS)
        assert support_radius(4.0, 2.0, PARAMS) > support_radius(4.0, 0.0, PARAMS)

    def test_nonpositive_range_rejected(self):
        with pytest.raises(ValueError):
            support_radius(0.0, 0.0, PARAMS)

    def test_euclidean_variant_ignores_velocity(self):
        params = AvoidanceParams(geometry=GEOM, velocity_support=False)
        assert support_radius(10.0, 5.0, params) == 0.0
        assert support_radius(1.0, 0.0, params) == pytest.approx(
            math.atan2(1.5, 1.0)
        )


@given(
    r=st.floats(2.2, 12.0),
    v_lo=st.floats(-3.0, 6.0),
    dv=st.floats(0.0, 3.0),
)
@settings(max_examples=200, deadline=None)
def test_support_monotone_in_closing_speed(r, v_lo, dv):
    """Approaching faster virtually moves the obstacle closer."""
    lo = support_radius(r, v_lo, PARAMS)
    hi = support_radius(r, v_lo + dv, PARAMS)
    assert hi >= lo - 1e-12


class TestRepulsiveForce:
    def test_zero_at_support_boundary(self):
        f = repulsive_force((0.0, 0.0), (0.4, 0.0), 0.4)
        assert f.dphi == pytest.approx(0.0, abs=1e-12)
        assert f.dtheta == 0.0

    def test_half_support_unit_factor(self):
        # at d = d_support / 2 the factor is exactly 1, so the force
        # magnitude equals d itself, pointing away from the obstacle
        f = repulsive_force((0.0, 0.0), (0.3, 0.0), 0.6)
        assert f.dphi == pytest.approx(0.3, abs=1e-12)
        assert f.dtheta == 0.0

    def test_zero_support_means_no_force(self):
        f = repulsive_force((0.0, 0.0), (0.0, 0.1), 0.0)
        assert (f.dphi, f.dtheta) == (0.0, 0.0)

    def test_coincident_pixel_ties_upward(self):
        f = repulsive_force((0.2, -0.1), (0.2, -0.1), 1.0)
        assert f.dphi == 0.0
        assert f.dtheta == 1.0

    def test_wraps_shorter_arc(self):
        # obstacle just below +pi, target just past the seam: the short
        # arc is +0.1, so the push drives the target further through the
        # seam (away from the obstacle), factor (0.5 - 0.1)/0.1 = 4
        f = repulsive_force((math.pi - 0.05, 0.0), (-math.pi + 0.05, 0.0), 0.5)
        assert f.dphi == pytest.approx(0.4, abs=1e-12)

    def test_outside_support_is_zero(self):
        f = repulsive_force((0.0, 0.0), (1.0, 1.0), 0.5)
        assert (f.dphi, f.dtheta) == (0.0, 0.0)


def image_with_obstacles(angle_pairs, r):
    """Valid pixels at given (phi, theta) angle pairs, all at range r."""
    img = RangeImage.empty(GEOM)
    for phi, theta in angle_pairs:
        row, col = angles_to_pixel(GEOM, phi, theta)
        img.ranges[row, col] = r
    return img


FORWARD = np.array([3.0, 0.0, 0.0])


class TestAdjustDirection:
    def test_empty_image_passthrough(self):
        img = RangeImage.empty(GEOM)
        res = adjust_direction(img, FORWARD, np.zeros(3), PARAMS)
        assert np.allclose(res.direction, [1.0, 0.0, 0.0], atol=1e-12)
        assert res.angular_offset_applied.dphi == 0.0
        assert res.angular_offset_applied.dtheta == 0.0
        assert not res.fov_clipped

    def test_symmetric_gap_centers(self):
        # Two equal obstacles symmetric in phi about the target: their
        # phi forces cancel and the direction bisects the gap.
        img = image_with_obstacles([(0.5, 0.0), (-0.5, 0.0)], 3.0)
        res = adjust_direction(img, FORWARD, FORWARD, PARAMS)
        assert res.angular_offset_applied.dphi == pytest.approx(0.0, abs=1e-12)

    def test_one_sided_wall_pushes_away(self):
        img = image_with_obstacles([(0.3, 0.0), (0.4, 0.0), (0.5, 0.0)], 3.0)
        res = adjust_direction(img, FORWARD, FORWARD, PARAMS)
        assert res.angular_offset_applied.dphi < 0.0

    def test_sum_clipped_to_strongest_single_force(self):
        """One-sided forces summing past their max must clip to the max.

        Three obstacles below the target at distances giving force
        magnitudes near {0.1, 0.2, 0.3}; the sum (~0.6) exceeds the
        strongest component, so the applied offset equals it exactly.
        """
        from veer.range_image import point_to_angles

        r = 3.0
        support = support_radius(r, 0.0, PARAMS)  # 0.98279
        img = RangeImage.empty(GEOM)
        cells = []
        # obstacles to the left of the target: every force pushes -phi
        for d in (support - 0.1, support - 0.2, support - 0.3):
            row, col = angles_to_pixel(GEOM, d, 0.0)
            img.ranges[row, col] = r
            cells.append((row, col))
        phi_t, theta_t = point_to_angles(FORWARD)
        forces = [
            repulsive_force(pixel_center_angles(GEOM, row, col), (phi_t, theta_t), support)
            for row, col in cells
        ]
        total = sum(f.dphi for f in forces)
        strongest = min(f.dphi for f in forces)  # most negative component
        assert total < strongest < 0.0
        res = adjust_direction(img, FORWARD, np.zeros(3), PARAMS)
        assert res.angular_offset_applied.dphi == pytest.approx(strongest, abs=1e-12)

    def test_fov_clamp_flags_and_limits(self):
        # near obstacle straight below the target pushes theta up past
        # the vertical field of view; the result is clamped and flagged
        img = image_with_obstacles([(0.0, -0.1)], 2.0)
        res = adjust_direction(img, FORWARD, FORWARD * 2, PARAMS)
        theta = math.asin(res.direction[2])
        assert theta <= GEOM.theta_max + 1e-12
        assert res.fov_clipped

    def test_zero_target_rejected(self):
        img = RangeImage.empty(GEOM)
        with pytest.raises(ValueError):
            adjust_direction(img, np.zeros(3), np.zeros(3), PARAMS)

    def test_unit_norm_always(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            img = RangeImage.empty(GEOM)
            mask = rng.random(GEOM.shape) < 0.1
            img.ranges[mask] = rng.uniform(0.5, 12.0, mask.sum())
            target = rng.normal(size=3) * 2.0
            if np.linalg.norm(target) < 1e-3:
                continue
            res = adjust_direction(img, target, rng.normal(size=3), PARAMS)
            assert np.linalg.norm(res.direction) == pytest.approx(1.0, abs=1e-9)
            theta = math.asin(np.clip(res.direction[2], -1.0, 1.0))
            assert GEOM.theta_min - 1e-9 <= theta <= GEOM.theta_max + 1e-9


def test_locality_far_pixels_bit_identical():
    """Adding zero-support (far) pixels must not change the result at all."""
    img = image_with_obstacles([(0.3, 0.0), (-0.2, 0.1)], 3.0)
    res1 = adjust_direction(img, FORWARD, FORWARD, PARAMS)

    far = img.copy()
    rng = np.random.default_rng(4)
    mask = (rng.random(GEOM.shape) < 0.3) & (far.ranges == 0.0)
    far.ranges[mask] = rng.uniform(40.0, 80.0, mask.sum())  # far beyond reach
    res2 = adjust_direction(far, FORWARD, FORWARD, PARAMS)

    assert res1.angular_offset_applied.dphi == res2.angular_offset_applied.dphi
    assert res1.angular_offset_applied.dtheta == res2.angular_offset_applied.dtheta
    assert (res1.direction == res2.direction).all()


def test_mirror_symmetry_in_phi():
    """Mirroring the image in phi about the target mirrors the phi offset."""
    pairs = [(0.35, 0.05), (0.18, -0.04)]
    img = image_with_obstacles(pairs, 3.2)
    mirrored = image_with_obstacles([(-p, t) for p, t in pairs], 3.2)
    res = adjust_direction(img, FORWARD, FORWARD, PARAMS)
    res_m = adjust_direction(mirrored, FORWARD, FORWARD, PARAMS)
    assert res_m.angular_offset_applied.dphi == pytest.approx(
        -res.angular_offset_applied.dphi, abs=1e-12
    )
    assert res_m.angular_offset_applied.dtheta == pytest.approx(
        res.angular_offset_applied.dtheta, abs=1e-12
    )


def test_clipping_bound_holds():
    """|applied offset| never exceeds the largest single-force component."""
    rng = np.random.default_rng(9)
    for _ in range(30):
        img = RangeImage.empty(GEOM)
        mask = rng.random(GEOM.shape) < 0.08
        img.ranges[mask] = rng.uniform(1.0, 8.0, mask.sum())
        v = rng.normal(size=3) * 2.0
        res = adjust_direction(img, FORWARD, v, PARAMS)
        # recompute per-pixel forces with the scalar reference ops
        phi_t, theta_t = 0.0, 0.0
        from veer.range_image import point_to_angles

        phi_t, theta_t = point_to_angles(FORWARD)
        max_phi = max_theta = 0.0
        rows, cols = np.nonzero(img.ranges)
        from veer.range_image import direction_grid

        dirs = direction_grid(GEOM)
        for row, col in zip(rows, cols):
            p_obs = pixel_center_angles(GEOM, row, col)
            v_toward = float(dirs[row, col] @ v)
            s = support_radius(img.ranges[row, col], v_toward, PARAMS)
            f = repulsive_force(p_obs, (phi_t, theta_t), s)
            max_phi = max(max_phi, abs(f.dphi))
            max_theta = max(max_theta, abs(f.dtheta))
        assert abs(res.angular_offset_applied.dphi) <= max_phi + 1e-12
        assert abs(res.angular_offset_applied.dtheta) <= max_theta + 1e-12
