"""Brute-force state-vector simulator of the central spin model.

    H(t) = sum_i h0(t).sigma_i + 1/(n-1) sum_{i>1} sum_mu v_mu(t) sigma_1^mu sigma_i^mu

Qubit 1 (the central qubit, index 0 here) is the most significant bit of
the amplitude index.  The Hamiltonian is applied matrix-free through
precomputed bit-flip and sign tables, so the cost per application is
O(n 2^n).  This engine is the ground truth for the symmetric-sector
simulator and is capped at 14 qubits by default.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._stepping import renormalize, rk4_linear, substeps
from .pauli import InvalidInput, SmallOperator, check_density, normalized_qubit, pauli_vector
from .schedules import Schedule, default_dt

MAX_QUBITS = 14
# rough working-set budget for the index tables and RK4 temporaries
MEMORY_LIMIT_BYTES = 2 * 1024 ** 3


def estimate_bytes(n: int) -> int:
    dim = 2 ** n
    return dim * (8 * (2 * n) + 16 * (3 * n + 8))


def _check_size(n: int, max_qubits: int):
    if n < 2:
        raise InvalidInput(f"need at least 2 qubits, got n={n}")
    if n > max_qubits:
        raise InvalidInput(f"n={n} exceeds the full-engine cap of {max_qubits} qubits")
    if estimate_bytes(n) > MEMORY_LIMIT_BYTES:
        raise MemoryError(f"n={n} needs ~{estimate_bytes(n) / 2**30:.1f} GiB")


@dataclass
class FullState:
    n: int
    amplitudes: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (2 ** self.n,):
            raise InvalidInput(f"expected {2 ** self.n} amplitudes, got {self.amplitudes.shape}")
        if abs(np.linalg.norm(self.amplitudes) - 1) > 1e-10:
            raise InvalidInput("state vector is not normalized")

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.n)


@lru_cache(maxsize=16)
def _tables(n: int):
    idx = np.arange(2 ** n)
    masks = 1 << (n - 1 - np.arange(n))
    signs = 1 - 2 * ((idx[None, :] & masks[:, None]) != 0)
    flips = idx[None, :] ^ masks[:, None]
    pair_flips = idx[None, :] ^ (masks[0] | masks[1:, None])
    for a in (signs, flips, pair_flips):
        a.setflags(write=False)
    return signs, flips, pair_flips


def product_init(phi, n: int, max_qubits: int = MAX_QUBITS) -> FullState:
    """|phi>^{(x) n}."""
    phi = normalized_qubit(phi)
    _check_size(n, max_qubits)
    psi = np.ones(1, dtype=complex)
    for _ in range(n):
        psi = np.kron(psi, phi)
    return FullState(n, psi, 0.0)


class _Generator:
    """Coefficient tables of H for one constant (h0, v) piece."""

    def __init__(self, n: int, h0, v):
        h0 = pauli_vector(h0)
        v = pauli_vector(v)
        signs, self.flips, self.pair_flips = _tables(n)
        s_c = signs[0]
        rep = signs[1:]
        self.diag = h0[2] * signs.sum(axis=0) + (v[2] / (n - 1)) * s_c * rep.sum(axis=0)
        self.flip_coef = h0[0] - 1j * h0[1] * signs
        self.pair_coef = (v[0] - v[1] * s_c[None, :] * rep) / (n - 1)
        self.use_flip = bool(h0[0] or h0[1])
        self.use_pair = bool(v[0] or v[1])

    def __call__(self, psi):
        out = self.diag * psi
        if self.use_flip:
            out += np.einsum("qi,qi->i", self.flip_coef, psi[self.flips])
        if self.use_pair:
            out += np.einsum("qi,qi->i", self.pair_coef, psi[self.pair_flips])
        return out


def apply_h(state, h0, v) -> np.ndarray:
    """H psi for the couplings (h0, v), without building the 2^n x 2^n matrix."""
    psi = state.amplitudes if isinstance(state, FullState) else np.asarray(state, dtype=complex)
    n = int(round(np.log2(psi.shape[0])))
    return _Generator(n, h0, v)(psi)


def hamiltonian_matrix(n: int, h0, v) -> np.ndarray:
    """Dense H assembled column by column from the matrix-free action (small n only)."""
    _check_size(n, 10)
    gen = _Generator(n, h0, v)
    eye = np.eye(2 ** n, dtype=complex)
    return np.stack([gen(col) for col in eye], axis=1)


def propagate(state: FullState, schedule: Schedule, t_target: float,
              dt: float | None = None) -> FullState:
    """Fixed-step RK4 of dpsi/dt = -i H psi from state.time to t_target.

    Steps are split at segment boundaries and the state is renormalized
    after every step.
    """
    if t_target < state.time:
        raise ValueError(f"t_target={t_target} precedes state time {state.time}")
    if dt is None:
        dt = default_dt(schedule.bounds())
    psi = state.amplitudes
    for t_a, t_b, h0, v in schedule.pieces(state.time, t_target):
        gen = _Generator(state.n, h0, v)
        count, h = substeps(t_a, t_b, dt)
        for _ in range(count):
            psi = renormalize(rk4_linear(gen, psi, h))
    return FullState(state.n, psi, float(t_target))


def dense_propagator(n: int, schedule: Schedule, t: float) -> np.ndarray:
    """Exact U_t as a dense matrix, product of segment exponentials (n <= 10)."""
    _check_size(n, 10)
    u = np.eye(2 ** n, dtype=complex)
    for t_a, t_b, h0, v in schedule.pieces(0.0, t):
        w, vecs = np.linalg.eigh(hamiltonian_matrix(n, h0, v))
        step = (vecs * np.exp(-1j * w * (t_b - t_a))) @ vecs.conj().T
        u = step @ u
    return u


def reduced_central(state: FullState) -> np.ndarray:
    """rho^c_ab = sum_rest psi_{a,rest} conj(psi_{b,rest})."""
    m = state.amplitudes.reshape(2, -1)
    return check_density(m @ m.conj().T)


def reduced_pair(state: FullState) -> np.ndarray:
    """Reduced density on (central, first replica); the full density for n = 2."""
    m = state.amplitudes.reshape(4, -1)
    return check_density(m @ m.conj().T)


def _apply_local(tensor: np.ndarray, op: SmallOperator) -> np.ndarray:
    k = len(op.support)
    mat = op.matrix.reshape((2,) * (2 * k))
    out = np.tensordot(mat, tensor, axes=(list(range(k, 2 * k)), list(op.support)))
    return np.moveaxis(out, list(range(k)), list(op.support))


def expectation_complex(state: FullState, ops) -> complex:
    """<psi| op_1 op_2 ... |psi> for operators on disjoint supports."""
    seen = set()
    for op in ops:
        if seen & set(op.support):
            raise InvalidInput("operator supports overlap")
        if max(op.support) >= state.n:
            raise InvalidInput(f"support {op.support} outside {state.n} qubits")
        seen |= set(op.support)
    t = state.tensor()
    for op in reversed(list(ops)):
        t = _apply_local(t, op)
    return complex(np.vdot(state.amplitudes, t.reshape(-1)))


def expectation(state: FullState, ops) -> float:
    return expectation_complex(state, ops).real


def swap_qubits(state: FullState, i: int, j: int) -> np.ndarray:
    """Amplitudes with qubits i and j exchanged."""
    return np.swapaxes(state.tensor(), i, j).reshape(-1)


def energy(state: FullState, h0, v) -> float:
    return float(np.vdot(state.amplitudes, apply_h(state, h0, v)).real)
