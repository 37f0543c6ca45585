import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from duality_lab.meanfield import (
    MeanFieldTrajectory, UndefinedFrequency, bloch_flow, bloch_rhs, free_flow, h_eff,
    measure_torsion, mf_integrate, mf_rhs, replica_driven_flow, torsion_frequency, torsion_probe,
    transverse_phase,
)
from duality_lab.pauli import (
    SX, InvalidInput, bloch_from_density, density_from_bloch, from_pauli, su2_exp, to_pauli,
)
from duality_lab.schedules import Schedule, random_schedule

unit = arrays(float, 3, elements=st.floats(-1, 1)).filter(lambda r: np.linalg.norm(r) > 0.1)
vec3 = arrays(float, 3, elements=st.floats(-2, 2))


def unit_vector(r):
    return r / np.linalg.norm(r)


class TestHeff:
    def test_no_interaction(self, rng):
        h0 = rng.normal(size=3)
        x = density_from_bloch(unit_vector(rng.normal(size=3)))
        np.testing.assert_allclose(h_eff(x, h0, [0, 0, 0]), from_pauli(h0))

    def test_maximally_mixed(self, rng):
        h0, v = rng.normal(size=3), rng.normal(size=3)
        np.testing.assert_allclose(h_eff(np.eye(2) / 2, h0, v), from_pauli(h0), atol=1e-15)

    def test_plus_state(self):
        x = 0.5 * np.ones((2, 2))
        np.testing.assert_allclose(h_eff(x, [0, 0, 0], [0.7, 0, 0]), 0.7 * SX)


class TestRhs:
    def test_equator_fixed_under_z_torsion(self):
        x = 0.5 * np.ones((2, 2))
        np.testing.assert_allclose(mf_rhs(x, [0, 0, 0], [0, 0, 1.3]), 0, atol=1e-15)

    def test_linear_precession(self, rng):
        r = unit_vector(rng.normal(size=3))
        out = to_pauli(mf_rhs(density_from_bloch(r), [0, 0, 1], [0, 0, 0]) / 1j * 1j) * 2
        np.testing.assert_allclose(out, 2 * np.cross([0, 0, 1], r), atol=1e-14)

    def test_pole_parallel_to_field(self):
        x = np.diag([1, 0])
        np.testing.assert_allclose(mf_rhs(x, [0, 0, 0], [0, 0, 2]), 0, atol=1e-15)

    @settings(max_examples=100, deadline=None)
    @given(unit, vec3, vec3)
    def test_bloch_and_commutator_forms_agree(self, r, h0, v):
        r = unit_vector(r)
        dx = mf_rhs(density_from_bloch(r), h0, v)
        np.testing.assert_allclose(2 * to_pauli(dx), bloch_rhs(r, h0, v), atol=1e-12)
        assert abs(np.trace(dx)) < 1e-15


class TestIntegrate:
    def test_linear_limit(self, rng):
        s = random_schedule(rng, 2.0)
        s = Schedule([(seg.t_start, seg.h0, [0, 0, 0]) for seg in s.segments], 2.0)
        phi = np.array([0.6, 0.8j])
        grid = np.linspace(0, 2, 9)
        traj = mf_integrate(phi, s, grid, dt=1e-3)
        u = np.eye(2)
        t = 0.0
        for i, t_next in enumerate(grid):
            for t_a, t_b, h0, _ in s.pieces(t, t_next):
                u = su2_exp(h0, t_b - t_a) @ u
            t = t_next
            psi = u @ phi
            r = bloch_from_density(np.outer(psi, psi.conj()))
            np.testing.assert_allclose(traj.bloch[i], r, atol=1e-8)
            np.testing.assert_allclose(free_flow(traj.bloch[0], s, grid)[i], r, atol=1e-12)

    @pytest.mark.parametrize("x0", [0.5, -0.3, 0.9])
    def test_x_torsion(self, x0):
        v1 = 1.0
        s = Schedule.constant([0, 0, 0], [v1, 0, 0], 3.0)
        grid = np.linspace(0, 3, 31)
        traj = mf_integrate(torsion_probe(x0), s, grid, dt=1e-3)
        np.testing.assert_allclose(traj.bloch[:, 0], x0, atol=1e-12)
        w = 2 * v1 * x0
        rho = np.sqrt(1 - x0 ** 2)
        # (r_y, r_z) starts at (0, rho) and rotates right-handedly about x
        np.testing.assert_allclose(traj.bloch[:, 1], -rho * np.sin(w * grid), atol=1e-9)
        np.testing.assert_allclose(traj.bloch[:, 2], rho * np.cos(w * grid), atol=1e-9)

    def test_z_torsion_equator_stationary(self):
        s = Schedule.constant([0, 0, 0], [0, 0, 1], 2.0)
        r0 = [np.cos(0.4), np.sin(0.4), 0.0]
        traj = mf_integrate(r0, s, np.linspace(0, 2, 5))
        np.testing.assert_allclose(traj.bloch, np.tile(r0, (5, 1)), atol=1e-14)

    def test_purity_and_trace(self, rng):
        s = random_schedule(rng, 10.0, n_segments=4, scale=1.5)
        traj = mf_integrate(unit_vector(rng.normal(size=3)), s, np.linspace(0, 10, 41), dt=2e-3)
        assert np.abs(traj.purity() - 1).max() < 1e-9
        for rho in traj.densities():
            assert np.trace(rho).real == pytest.approx(1, abs=1e-15)

    def test_rhs_vs_finite_difference(self, rng):
        dt = 1e-3
        for _ in range(100):
            h0, v = rng.uniform(-1, 1, 3), rng.uniform(-1, 1, 3)
            r0 = unit_vector(rng.normal(size=3))
            s = Schedule.constant(h0, v, 0.02)
            r = bloch_flow(r0, s, [0.01 - dt, 0.01 + dt], dt=dt / 4)
            fd = (r[1] - r[0]) / (2 * dt)
            mid = bloch_flow(r0, s, [0.01], dt=dt / 4)[0]
            assert np.abs(fd - bloch_rhs(mid, h0, v)).max() < 50 * dt ** 2

    def test_batched_initial_conditions(self, rng):
        s = random_schedule(rng, 1.0)
        r0 = np.array([unit_vector(rng.normal(size=3)) for _ in range(4)])
        grid = [0.0, 0.5, 1.0]
        batch = bloch_flow(r0, s, grid, dt=1e-3)
        for i in range(4):
            np.testing.assert_allclose(batch[:, i], bloch_flow(r0[i], s, grid, dt=1e-3), atol=1e-13)

    def test_multi_axis_is_not_single_axis(self):
        v = 1.0
        r0 = unit_vector(np.array([0.3, -0.5, 0.8]))
        both = bloch_flow(r0, Schedule.constant([0, 0, 0], [v, v, 0], 1.0), [1.0])[0]
        # single-axis torsion about n = (1,1,0)/sqrt2 with the same total strength 2v,
        # integrated in a frame where n is the x axis
        c = 1 / np.sqrt(2)
        rot = np.array([[c, c, 0], [-c, c, 0], [0, 0, 1]])
        single = rot.T @ bloch_flow(rot @ r0, Schedule.constant([0, 0, 0], [2 * v, 0, 0], 1.0),
                                    [1.0])[0]
        assert np.linalg.norm(both - single) > 1e-3

    def test_bad_inputs(self):
        s = Schedule.constant([0, 0, 1], [1, 0, 0], 1.0)
        with pytest.raises(InvalidInput):
            mf_integrate([1, 1], s, [0, 1])
        with pytest.raises(InvalidInput):
            mf_integrate([1, 0], s, [0, 2])
        with pytest.raises(InvalidInput):
            mf_integrate([0, 0, 0.5], s, [0, 1])


class TestTorsionFrequency:
    def test_half_projection(self):
        res = measure_torsion(1.0, 0.5)
        assert res["omega"] == pytest.approx(1.0, rel=1e-3)

    @pytest.mark.parametrize("x0", [0.5, 1.0])
    def test_sign_flip(self, x0):
        assert measure_torsion(1.0, x0)["omega"] == pytest.approx(
            -measure_torsion(1.0, -x0)["omega"], rel=1e-9)

    def test_linear_precession_about_z(self):
        s = Schedule.constant([0, 0, 1], [0, 0, 0], 10.0)
        traj = mf_integrate([1, 0, 0], s, np.linspace(0, 10, 201), dt=1e-3)
        assert torsion_frequency(traj, axis=3) == pytest.approx(2.0, rel=1e-9)

    def test_undefined_at_pole(self):
        s = Schedule.constant([0, 0, 0], [1, 0, 0], 1.0)
        traj = mf_integrate([1, 0, 0], s, np.linspace(0, 1, 11))
        with pytest.raises(UndefinedFrequency):
            torsion_frequency(traj, axis=1)

    def test_bad_axis(self):
        with pytest.raises(InvalidInput):
            transverse_phase(np.zeros((3, 3)), 0)

    def test_probe_clamp(self):
        r = torsion_probe(1.0)
        assert np.linalg.norm(r) == pytest.approx(1)
        assert np.hypot(r[1], r[2]) == pytest.approx(1e-3)


class TestReplicaDriven:
    def test_no_interaction_is_free(self, rng):
        s = Schedule.constant(rng.normal(size=3), [0, 0, 0], 1.0)
        r0 = unit_vector(rng.normal(size=3))
        grid = np.linspace(0, 1, 5)
        np.testing.assert_allclose(replica_driven_flow(r0, s, grid), free_flow(r0, s, grid),
                                   atol=1e-10)

    def test_matches_mean_field_without_field(self, rng):
        # with h0 = 0 the replicas stand still, and so does the mean-field order parameter
        # only at first order; both flows agree to O(t^2)
        s = Schedule.constant([0, 0, 0], [1.0, 0.5, 0], 0.01)
        r0 = unit_vector(rng.normal(size=3))
        a = replica_driven_flow(r0, s, [0.01])[0]
        b = bloch_flow(r0, s, [0.01])[0]
        assert np.linalg.norm(a - b) < 1e-3


def test_trajectory_container():
    s = Schedule.constant([0, 0, 1], [0, 0, 0], 1.0)
    traj = mf_integrate([1, 0], s, [0, 1])
    assert isinstance(traj, MeanFieldTrajectory)
    np.testing.assert_allclose(traj.density(0), np.diag([1, 0]))
