import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from duality_lab.pauli import (
    I2, SWAP, SX, SY, SZ, InvalidInput, SmallOperator, adjoint_rotation, bloch_distance,
    bloch_from_density, bloch_roundtrip, check_density, density_from_bloch, from_pauli,
    pair_interaction, pair_interaction_norm, pair_interaction_norm_bound, partial_trace_second, qubit_from_bloch, su2_exp,
    to_pauli, trace_distance, trace_norm,
)

finite = st.floats(-5, 5, allow_nan=False)
vec3 = arrays(float, 3, elements=finite)

KET0 = np.diag([1, 0]).astype(complex)
KET1 = np.diag([0, 1]).astype(complex)
PLUS = 0.5 * np.ones((2, 2), dtype=complex)


def random_density(rng, dim=2):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def hermitian_from(a, b):
    m = a + 1j * b
    return m + m.conj().T


class TestTraceNorm:
    def test_sigma_x(self):
        assert trace_norm(SX) == pytest.approx(2.0)

    def test_pair_interaction_isotropic(self):
        # sum_mu sigma^mu (x) sigma^mu = 2 SWAP - I has eigenvalues 1, 1, 1, -3
        assert trace_norm(pair_interaction([1, 1, 1])) == pytest.approx(6.0)
        assert trace_norm(pair_interaction([1, 1, 1])) < 4 * np.sqrt(3)

    @pytest.mark.parametrize("v", [[2, 0, 0], [0, -1.5, 0], [0, 0, 0.3]])
    def test_pair_interaction_single_axis(self, v):
        assert trace_norm(pair_interaction(v)) == pytest.approx(4 * np.linalg.norm(v))

    def test_zero(self):
        assert trace_norm(np.zeros((4, 4))) == 0.0

    def test_small_operator_input(self):
        assert trace_norm(SmallOperator(SZ, (0,))) == pytest.approx(2.0)

    def test_non_finite_rejected(self):
        with pytest.raises(InvalidInput):
            trace_norm(np.array([[np.nan, 0], [0, 1]]))

    def test_non_hermitian_uses_singular_values(self):
        m = np.array([[0, 3], [0, 0]], dtype=complex)
        assert trace_norm(m) == pytest.approx(3.0)

    @settings(max_examples=60, deadline=None)
    @given(arrays(float, (4, 4), elements=finite), arrays(float, (4, 4), elements=finite),
           arrays(float, (4, 4), elements=finite), arrays(float, (4, 4), elements=finite),
           st.floats(-3, 3))
    def test_norm_axioms(self, a, b, c, d, s):
        x, y = hermitian_from(a, b), hermitian_from(c, d)
        assert trace_norm(x + y) <= trace_norm(x) + trace_norm(y) + 1e-9
        assert trace_norm(s * x) == pytest.approx(abs(s) * trace_norm(x), rel=1e-9, abs=1e-9)

    @settings(max_examples=100, deadline=None)
    @given(vec3)
    def test_pair_interaction_norm_closed_form(self, v):
        exact = trace_norm(pair_interaction(v))
        assert exact == pytest.approx(pair_interaction_norm(v), rel=1e-10, abs=1e-10)
        assert 4 * np.abs(v).max() - 1e-10 <= exact <= pair_interaction_norm_bound(v) + 1e-10


class TestTraceDistance:
    def test_identical(self):
        assert trace_distance(KET0, KET0) == 0.0

    def test_orthogonal(self):
        assert trace_distance(KET0, KET1) == pytest.approx(2.0)

    def test_zero_vs_plus(self):
        # difference matrix has eigenvalues +-1/sqrt(2)
        assert trace_distance(KET0, PLUS) == pytest.approx(np.sqrt(2))

    def test_twice_the_half_normalized_distance(self, rng):
        a, b = random_density(rng), random_density(rng)
        half = 0.5 * np.abs(np.linalg.eigvalsh(a - b)).sum()
        assert trace_distance(a, b) == pytest.approx(2 * half)

    def test_metric_axioms(self, rng):
        for _ in range(50):
            a, b, c = (random_density(rng) for _ in range(3))
            assert trace_distance(a, b) == pytest.approx(trace_distance(b, a))
            assert trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-12
            assert 0 <= trace_distance(a, b) <= 2 + 1e-12

    def test_bloch_distance_matches_matrix_form(self, rng):
        for _ in range(20):
            a, b = random_density(rng), random_density(rng)
            d = bloch_distance(bloch_from_density(a), bloch_from_density(b))
            assert d == pytest.approx(trace_distance(a, b), abs=1e-12)


class TestBloch:
    @pytest.mark.parametrize("rho,r", [(KET0, [0, 0, 1]), (I2 / 2, [0, 0, 0]), (PLUS, [1, 0, 0])])
    def test_known_vectors(self, rho, r):
        np.testing.assert_allclose(bloch_from_density(rho), r, atol=1e-15)
        np.testing.assert_allclose(bloch_roundtrip(rho), rho, atol=1e-14)

    def test_roundtrip_random(self, rng):
        for _ in range(30):
            rho = random_density(rng)
            np.testing.assert_allclose(bloch_roundtrip(rho), rho, atol=1e-14)

    def test_too_long_rejected(self):
        with pytest.raises(InvalidInput):
            density_from_bloch([0, 0, 1.001])

    def test_density_validation(self):
        with pytest.raises(InvalidInput):
            check_density(np.array([[1, 1], [0, 0]]))
        with pytest.raises(InvalidInput):
            check_density(np.diag([0.6, 0.6]))
        with pytest.raises(InvalidInput):
            check_density(np.diag([1.1, -0.1]))

    def test_tiny_negative_eigenvalue_floored(self):
        rho = check_density(np.diag([1 + 5e-11, -5e-11]))
        assert np.linalg.eigvalsh(rho).min() >= 0

    @settings(max_examples=50, deadline=None)
    @given(vec3)
    def test_pauli_roundtrip(self, c):
        np.testing.assert_allclose(to_pauli(from_pauli(c)), c, atol=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0, np.pi), st.floats(-np.pi, np.pi))
    def test_qubit_from_bloch(self, theta, phase):
        r = [np.sin(theta) * np.cos(phase), np.sin(theta) * np.sin(phase), np.cos(theta)]
        phi = qubit_from_bloch(r)
        np.testing.assert_allclose(bloch_from_density(np.outer(phi, phi.conj())), r, atol=1e-12)


class TestPairInteraction:
    def test_zero(self):
        np.testing.assert_array_equal(pair_interaction([0, 0, 0]), np.zeros((4, 4)))

    def test_zz(self):
        np.testing.assert_array_equal(pair_interaction([0, 0, 1]), np.diag([1, -1, -1, 1]))

    @settings(max_examples=100, deadline=None)
    @given(vec3)
    def test_swap_symmetric_and_hermitian(self, v):
        m = pair_interaction(v)
        assert np.abs(m @ SWAP - SWAP @ m).max() <= 1e-14
        assert np.abs(m - m.conj().T).max() == 0


class TestSmallOperator:
    def test_shape_mismatch(self):
        with pytest.raises(InvalidInput):
            SmallOperator(np.eye(4), (0,))

    def test_repeated_support(self):
        with pytest.raises(InvalidInput):
            SmallOperator(np.eye(4), (1, 1))


def test_partial_trace_of_product():
    a, b = PLUS, KET1
    np.testing.assert_allclose(partial_trace_second(np.kron(a, b)), a)


@settings(max_examples=50, deadline=None)
@given(vec3, st.floats(-3, 3), vec3, st.floats(-3, 3))
def test_adjoint_rotation_is_homomorphism(h1, t1, h2, t2):
    g, w = su2_exp(h1, t1), su2_exp(h2, t2)
    np.testing.assert_allclose(adjoint_rotation(g @ w), adjoint_rotation(g) @ adjoint_rotation(w),
                               atol=1e-12)
    o = adjoint_rotation(g)
    np.testing.assert_allclose(o @ o.T, np.eye(3), atol=1e-12)


def test_su2_exp_matches_eigendecomposition(rng):
    h = rng.normal(size=3)
    w, vecs = np.linalg.eigh(from_pauli(h))
    expected = (vecs * np.exp(-0.7j * w)) @ vecs.conj().T
    np.testing.assert_allclose(su2_exp(h, 0.7), expected, atol=1e-14)
    assert np.allclose(su2_exp([0, 0, 0], 1.0), I2)
    assert np.allclose(su2_exp([0, 0, 1], np.pi / 2), -1j * SZ)
    assert np.allclose(su2_exp([0, 1, 0], np.pi / 2), -1j * SY)
