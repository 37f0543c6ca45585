"""Small-operator linear algebra for qubits.

Pauli expansions, Bloch conversions, trace norms and trace distances for
2x2 and 4x4 operators.

Trace distance here is the *unnormalized* trace norm of the difference,
``||a - b||_1 = tr|a - b|``, with range [0, 2].  It is twice the
"half-normalized" trace distance found in most textbooks.
"""

from dataclasses import dataclass

import numpy as np

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = np.stack([SX, SY, SZ])

SWAP = np.array(
    [[1, 0, 0, 0],
     [0, 0, 1, 0],
     [0, 1, 0, 0],
     [0, 0, 0, 1]], dtype=complex)

# eigenvalues more negative than this are an error, above it they are floored
DENSITY_TOL = 1e-10


class InvalidInput(ValueError):
    """Raised when an operator, state or density fails validation."""


@dataclass(frozen=True)
class SmallOperator:
    """A 2x2 or 4x4 operator acting on the listed qubits (0 = central)."""

    matrix: np.ndarray
    support: tuple

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        support = tuple(int(q) for q in self.support)
        if m.shape != (2 ** len(support),) * 2 or len(support) not in (1, 2):
            raise InvalidInput(f"matrix shape {m.shape} does not match support {support}")
        if len(set(support)) != len(support):
            raise InvalidInput(f"repeated qubit in support {support}")
        if not np.all(np.isfinite(m)):
            raise InvalidInput("operator has non-finite entries")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "support", support)


def pauli_vector(v) -> np.ndarray:
    """Validate and return a length-3 float array of Pauli coefficients."""
    arr = np.asarray(v, dtype=float).reshape(-1)
    if arr.shape != (3,):
        raise InvalidInput(f"expected 3 Pauli coefficients, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput("Pauli coefficients must be finite")
    return arr


def from_pauli(coeffs) -> np.ndarray:
    """2x2 matrix sum_mu c_mu sigma^mu (no identity part)."""
    return np.einsum("m,mij->ij", np.asarray(coeffs, dtype=complex), PAULIS)


def to_pauli(op) -> np.ndarray:
    """Real Pauli coefficients tr(op sigma^mu)/2 of a 2x2 Hermitian operator."""
    return 0.5 * np.einsum("ij,mji->m", np.asarray(op), PAULIS).real


def _as_matrix(op) -> np.ndarray:
    m = op.matrix if isinstance(op, SmallOperator) else np.asarray(op)
    return m


def trace_norm(op) -> float:
    """Sum of singular values, tr|op|.

    Accepts a :class:`SmallOperator` or any square array; commutators of
    full-register operators go through the same function.
    """
    m = _as_matrix(op)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidInput(f"trace norm needs a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidInput("operator has non-finite entries")
    if np.allclose(m, m.conj().T, rtol=0, atol=1e-13 * (1 + np.abs(m).max(initial=0))):
        return float(np.abs(np.linalg.eigvalsh(m)).sum())
    return float(np.linalg.svd(m, compute_uv=False).sum())


def operator_norm(op) -> float:
    """Largest singular value."""
    m = _as_matrix(op)
    return float(np.linalg.svd(m, compute_uv=False)[0])


def check_density(rho, tol: float = DENSITY_TOL) -> np.ndarray:
    """Validate a density matrix of any dimension and floor tiny negative eigenvalues.

    Hermiticity and unit trace are checked to 1e-12; eigenvalues down to
    ``-tol`` are clamped to zero (integrator drift), anything below raises.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidInput(f"density must be square, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise InvalidInput("density has non-finite entries")
    if np.abs(rho - rho.conj().T).max() > 1e-12:
        raise InvalidInput("density is not Hermitian")
    if abs(np.trace(rho) - 1) > 1e-12:
        raise InvalidInput(f"density trace {np.trace(rho).real!r} != 1")
    w, u = np.linalg.eigh(rho)
    if w.min() < -tol:
        raise InvalidInput(f"density has negative eigenvalue {w.min():.3e}")
    if w.min() < 0:
        w = np.clip(w, 0, None)
        w /= w.sum()
        rho = (u * w) @ u.conj().T
    return rho


def bloch_from_density(rho) -> np.ndarray:
    """Bloch vector r_mu = tr(rho sigma^mu) of a qubit density."""
    rho = check_density(rho)
    if rho.shape != (2, 2):
        raise InvalidInput("qubit density must be 2x2")
    return 2 * to_pauli(rho)


def density_from_bloch(r) -> np.ndarray:
    """(I + r.sigma)/2, rejecting |r| > 1 beyond tolerance."""
    r = pauli_vector(r)
    if np.linalg.norm(r) > 1 + DENSITY_TOL:
        raise InvalidInput(f"Bloch vector length {np.linalg.norm(r)!r} exceeds 1")
    return 0.5 * (I2 + from_pauli(r))


def bloch_roundtrip(rho) -> np.ndarray:
    return density_from_bloch(bloch_from_density(rho))


def trace_distance(a, b) -> float:
    """||a - b||_1 without the 1/2 prefactor; range [0, 2]."""
    return trace_norm(check_density(a) - check_density(b))


def bloch_distance(r_a, r_b) -> np.ndarray:
    """Trace distance between qubit densities given as Bloch vectors.

    For 2x2 densities ||rho_a - rho_b||_1 = |r_a - r_b|.  Vectorized over
    leading axes.
    """
    return np.linalg.norm(np.asarray(r_a) - np.asarray(r_b), axis=-1)


def pure_density(phi) -> np.ndarray:
    phi = normalized_qubit(phi)
    return np.outer(phi, phi.conj())


def normalized_qubit(phi, tol: float = 1e-12) -> np.ndarray:
    """Validate a normalized 2-vector."""
    phi = np.asarray(phi, dtype=complex).reshape(-1)
    if phi.shape != (2,) or not np.all(np.isfinite(phi)):
        raise InvalidInput(f"qubit state must be 2 finite amplitudes, got {phi!r}")
    norm2 = float(np.vdot(phi, phi).real)
    if abs(norm2 - 1) > tol:
        raise InvalidInput(f"qubit state not normalized: |phi|^2 = {norm2!r}")
    return phi


def qubit_from_bloch(r) -> np.ndarray:
    """A pure state |phi> whose Bloch vector is the unit vector r."""
    r = pauli_vector(r)
    norm = np.linalg.norm(r)
    if abs(norm - 1) > 1e-9:
        raise InvalidInput(f"pure-state Bloch vector must be unit length, got {norm!r}")
    r = r / norm
    theta = np.arctan2(np.hypot(r[0], r[1]), r[2])
    phase = np.arctan2(r[1], r[0])
    return np.array([np.cos(theta / 2), np.exp(1j * phase) * np.sin(theta / 2)])


def pair_interaction(v) -> np.ndarray:
    """4x4 matrix sum_mu v_mu sigma^mu (x) sigma^mu on (central, replica)."""
    v = pauli_vector(v)
    return sum(v[m] * np.kron(PAULIS[m], PAULIS[m]) for m in range(3))


def pair_interaction_eigenvalues(v) -> np.ndarray:
    """Eigenvalues of V_12 on the Bell states Phi+, Phi-, Psi+, Psi-."""
    v1, v2, v3 = pauli_vector(v)
    return np.array([v1 - v2 + v3, -v1 + v2 + v3, v1 + v2 - v3, -v1 - v2 - v3])


def pair_interaction_norm(v) -> float:
    """Exact tr|V_12| from the Bell-basis eigenvalues.

    Lies between 4 max|v_mu| and 4 |v|; both ends are reached when only one
    coupling is nonzero.  The isotropic coupling (1, 1, 1) gives 6.
    """
    return float(np.abs(pair_interaction_eigenvalues(v)).sum())


def pair_interaction_norm_bound(v) -> float:
    """4 |v|, the Cauchy-Schwarz upper bound on tr|V_12| used for v_m."""
    return 4.0 * float(np.linalg.norm(pauli_vector(v)))


def commutator(a, b):
    return a @ b - b @ a


def partial_trace_second(rho4) -> np.ndarray:
    """Trace out the second qubit of a 4x4 operator (first qubit is the high bit)."""
    return np.einsum("ajbj->ab", np.asarray(rho4).reshape(2, 2, 2, 2))


def kron_unitary_conj(rho4, u) -> np.ndarray:
    """(u (x) u) rho4 (u (x) u)^dagger."""
    uu = np.kron(u, u)
    return uu @ rho4 @ uu.conj().T


def su2_exp(h, t: float) -> np.ndarray:
    """exp(-i t h.sigma) in closed form."""
    h = np.asarray(h, dtype=float)
    norm = np.linalg.norm(h)
    if norm == 0:
        return I2.copy()
    theta = norm * t
    return np.cos(theta) * I2 - 1j * np.sin(theta) * from_pauli(h / norm)


def adjoint_rotation(u) -> np.ndarray:
    """SO(3) matrix O with u^dagger sigma^mu u = sum_nu O[mu, nu] sigma^nu.

    Composition: O(g @ w) = O(g) @ O(w).
    """
    conj = np.einsum("ij,mjk,kl->mil", u.conj().T, PAULIS, u)
    return 0.5 * np.einsum("mij,nji->mn", conj, PAULIS).real
