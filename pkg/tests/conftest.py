"""Shared oracles: dense Kronecker-product constructions independent of the engines."""

from functools import reduce

import numpy as np
import pytest

from duality_lab.pauli import I2, PAULIS


def embed_site(op, site, n):
    """op acting on ``site`` (0 = central, most significant) of n qubits."""
    factors = [I2] * n
    factors[site] = op
    return reduce(np.kron, factors)


def dense_h(n, h0, v):
    h = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for i in range(n):
        for mu in range(3):
            h += h0[mu] * embed_site(PAULIS[mu], i, n)
    for i in range(1, n):
        for mu in range(3):
            h += v[mu] / (n - 1) * embed_site(PAULIS[mu], 0, n) @ embed_site(PAULIS[mu], i, n)
    return h


def dense_evolve(psi, n, schedule, t):
    """Exact piecewise-constant propagation via dense eigendecomposition."""
    for t_a, t_b, h0, v in schedule.pieces(0.0, t):
        w, vecs = np.linalg.eigh(dense_h(n, h0, v))
        psi = vecs @ (np.exp(-1j * w * (t_b - t_a)) * (vecs.conj().T @ psi))
    return psi


def product(phi, n):
    return reduce(np.kron, [np.asarray(phi, dtype=complex)] * n)


def central_density(psi):
    m = psi.reshape(2, -1)
    return m @ m.conj().T


CANON_PHI = np.array([np.sqrt(0.9), np.sqrt(0.1)], dtype=complex)  # Bloch (0.6, 0, 0.8)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for an acceptance criterion.

    Usage: ``criterion(number, ok, detail)``; the line is printed immediately
    and repeated in the terminal summary.
    """

    def record(number: int, ok: bool, detail: str):
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[number])
