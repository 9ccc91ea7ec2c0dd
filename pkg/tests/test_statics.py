import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_poses
from footinterface.geometry import default_geometry
from footinterface.kinematics import PedalPose, inverse_kinematics, placement_sign
from footinterface.statics import (elastic_energy, energy_scan, local_minima, resultant_wrench,
                                   restoring_wrench, stiffness_matrix, structure_matrix)

GEOM = default_geometry()
unit = st.floats(-1.0, 1.0, allow_nan=False)


def random_state(rng, geom):
    """Admissible delta-force state: forces >= 0, pitch cells loaded."""
    f = geom.pretension.copy()
    f[:6] += rng.uniform(-0.03, 0.03, 6)
    f[6:] = rng.uniform(0.0, 5.0, 2)
    return f


def hooke_wrench(geom, f_state, pose0):
    """Planar wrench as a function of pose with the springs following Hooke's law."""
    l0 = inverse_kinematics(pose0, geom)

    def wrench(pose):
        f = f_state.copy()
        f[:6] += placement_sign(geom) * geom.stiffness * (inverse_kinematics(pose, geom) - l0)
        return resultant_wrench(f, pose, geom).as_array()[:3]
    return wrench


def central_jacobian(fn, x, h):
    cols = []
    for j in range(3):
        e = np.zeros_like(x)
        e[j] = h
        cols.append((fn(x + e) - fn(x - e)) / (2 * h))
    return np.column_stack(cols)


class TestResultantWrench:
    def test_zero_delta(self, geom):
        w = resultant_wrench(geom.pretension, PedalPose(0.5, -0.3, 0.1, 0.0), geom)
        assert np.allclose(w.as_array(), 0.0)

    def test_pitch_moment(self, geom):
        f = geom.pretension.copy()
        f[6], f[7] = 2.0, 1.0
        assert resultant_wrench(f, PedalPose(), geom).mx == pytest.approx(8.0)

    def test_pure_x_displacement_is_symmetric(self, geom):
        pose = np.array([1.2, 0.0, 0.0, 0.0])
        f = geom.pretension.copy()
        f[:6] += geom.stiffness * (inverse_kinematics(pose, geom) - geom.home_lengths)
        w = resultant_wrench(f, pose, geom)
        assert w.fy == pytest.approx(0.0, abs=1e-15) and w.mz == pytest.approx(0.0, abs=1e-14)
        assert w.fx < 0  # pulls back towards home


class TestStructureMatrix:
    def test_home_columns(self, geom):
        js = structure_matrix(PedalPose(), geom)
        u = geom.base_points - geom.mobile_points
        u = u / np.linalg.norm(u, axis=1)[:, None]
        assert np.allclose(js[:2, :6], u.T)
        assert np.allclose(js[3, 6:], [geom.toe_lever, -geom.heel_lever])

    def test_matches_wrench(self, geom, rng):
        for pose in random_poses(rng, geom, 10):
            f = random_state(rng, geom)
            lhs = structure_matrix(pose, geom) @ (f - geom.pretension)
            assert np.allclose(lhs, resultant_wrench(f, pose, geom).as_array(), atol=1e-12)

    def test_unit_columns(self, geom, rng):
        for pose in random_poses(rng, geom, 6):
            assert np.allclose(np.linalg.norm(structure_matrix(pose, geom)[:2, :6], axis=0), 1.0, atol=1e-12)


class TestStiffness:
    def test_zero_delta_at_home(self, geom):
        js = structure_matrix(PedalPose(), geom)[:3, :6]
        k = stiffness_matrix(PedalPose(), geom.pretension, geom)
        assert np.allclose(k[:3, :3], js @ np.diag(geom.stiffness) @ js.T, atol=1e-15)

    def test_symmetric_at_home(self, geom):
        k = stiffness_matrix(PedalPose(), geom.pretension, geom)
        assert np.allclose(k, k.T)

    @pytest.mark.parametrize("placement", ["outside", "inside"])
    def test_finite_differences(self, geom, rng, placement):
        g = geom.with_placement(placement)
        for pose in random_poses(rng, g, 20):
            f = random_state(rng, g)
            fd = -central_jacobian(hooke_wrench(g, f, pose), pose, 1e-5)
            k = stiffness_matrix(pose, f, g)[:3, :3]
            assert np.abs(k - fd).max() / np.abs(fd).max() < 1e-4

    def test_pitch_entry_switches(self, geom):
        f = geom.pretension.copy()
        f[6] = 1.0
        assert stiffness_matrix(PedalPose(), f, geom)[3, 3] == geom.torsion_stiffness[0]
        f[6], f[7] = 0.0, 1.0
        assert stiffness_matrix(PedalPose(), f, geom)[3, 3] == geom.torsion_stiffness[1]


class TestEnergy:
    def test_zero_at_home(self, geom):
        assert elastic_energy(PedalPose(), geom) == 0.0

    @settings(max_examples=100, deadline=None)
    @given(unit, unit, unit)
    def test_mirror_symmetry(self, x, y, yaw):
        q = np.array([x, y, yaw]) * GEOM.limits[:3]
        assert elastic_energy(q, GEOM) == pytest.approx(elastic_energy(q * [-1, 1, -1], GEOM), abs=1e-12)

    @pytest.mark.parametrize("placement", ["outside", "inside"])
    def test_gradient_is_restoring_wrench(self, geom, rng, placement):
        g = geom.with_placement(placement)
        for pose in random_poses(rng, g, 20):
            grad = np.zeros(4)
            for j in range(4):
                e = np.zeros(4)
                e[j] = 1e-6
                grad[j] = (elastic_energy(pose + e, g) - elastic_energy(pose - e, g)) / 2e-6
            w = restoring_wrench(pose, g).as_array()
            assert np.linalg.norm(-grad - w) / np.linalg.norm(w) < 1e-5

    def test_pitch_energy(self, geom):
        theta = math.radians(5.0)
        assert elastic_energy([0, 0, 0, theta], geom) == pytest.approx(0.5 * geom.torsion_stiffness[0] * theta ** 2)


class TestEnergyScan:
    def test_outside_single_minimum_at_home(self, geom):
        scan = energy_scan(geom, 21, 21, 21)
        assert scan.minima == [(0.0, 0.0, 0.0)]
        assert scan.energy.min() == 0.0

    def test_inside_has_extra_minima(self, inside_geom):
        scan = energy_scan(inside_geom, 21, 21, 21)
        assert len(scan.minima) >= 3
        assert max(abs(m[2]) for m in scan.minima) == pytest.approx(inside_geom.yaw_limit)

    def test_even_in_yaw(self, geom):
        scan = energy_scan(geom, 21, 21, 21)
        assert np.allclose(scan.energy[10, 10, :], scan.energy[10, 10, ::-1], atol=1e-12)

    def test_resolution_guard(self, geom):
        with pytest.raises(ValueError):
            energy_scan(geom, 11, 21, 21)

    def test_local_minima_plateau(self):
        v = np.array([[3.0, 3.0, 3.0], [3.0, 1.0, 1.0], [3.0, 3.0, 3.0]])
        strict, weak = local_minima(v)
        assert strict.size == 0 and len(weak) == 2

    def test_rows_order(self, geom):
        scan = energy_scan(geom, 21, 21, 21)
        first = next(scan.rows())
        assert first[:3] == (scan.x[0], scan.y[0], scan.yaw[0])
