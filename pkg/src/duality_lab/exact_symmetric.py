"""Exact evolution inside the replica-symmetric sector.

The initial state |phi>^{(x) n} and the Hamiltonian are invariant under
permutations of the n-1 replicas, so the state stays in
(central qubit) (x) (Dicke states of the replicas), a space of dimension
2n.  On that space sum_{i>1} sigma_i^mu = 2 J^mu with j = (n-1)/2 and

    H = h0.sigma_1 + 2 h0.J + 2/(n-1) sum_mu v_mu sigma_1^mu J^mu.

Amplitudes are stored as a (2, n) array psi[a, k]: ``a`` is the central
qubit, ``k`` counts replicas in |1>, and J^3 |k> = (j - k) |k>.

Large n makes the free term stiff (its norm grows like n |h0|), so the
default integrator works in a frame co-rotating with the free
single-qubit motion.  The lab-frame state is ``w^{(x) n} psi`` where
``w`` is the 2x2 frame unitary carried by the state; in that frame only
the interaction remains, with norm O(|v|) independent of n.  Reduced
densities are rotated back with ``w`` before they are returned.
"""

from dataclasses import dataclass, field
from math import lgamma

import numpy as np

from ._stepping import substeps
from .pauli import (
    I2, PAULIS, InvalidInput, adjoint_rotation, check_density, kron_unitary_conj,
    normalized_qubit, pauli_vector, su2_exp,
)
from .schedules import Schedule, default_dt


@dataclass
class SectorState:
    n: int
    amplitudes: np.ndarray
    time: float = 0.0
    frame: np.ndarray = field(default_factory=lambda: I2.copy())

    def __post_init__(self):
        if self.n < 2:
            raise InvalidInput(f"need at least 2 qubits, got n={self.n}")
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (2, self.n):
            raise InvalidInput(f"expected amplitudes of shape (2, {self.n}), "
                               f"got {self.amplitudes.shape}")
        if abs(np.linalg.norm(self.amplitudes) - 1) > 1e-10:
            raise InvalidInput("sector state is not normalized")

    def lab(self) -> "SectorState":
        """The same state expressed with the identity frame.

        Costs a dense rotation of the collective spin, so it is only meant
        for modest n (tests, embedding into the full register).
        """
        if np.array_equal(self.frame, I2):
            return self
        d = wigner_rotation(self.n - 1, self.frame)
        amps = self.frame @ self.amplitudes @ d.T
        return SectorState(self.n, amps, self.time, I2.copy())


class CollectiveSpin:
    """Tridiagonal action of J^1, J^2, J^3 on the spin-j space of n-1 replicas."""

    def __init__(self, n_rep: int):
        self.n_rep = n_rep
        k = np.arange(n_rep + 1)
        self.jz = n_rep / 2 - k
        # <k-1| J+ |k> = sqrt(k (n_rep + 1 - k)), for k = 1..n_rep
        self.ladder = np.sqrt(k[1:] * (n_rep + 1 - k[1:]))

    def apply(self, psi) -> np.ndarray:
        """Stack (J^1 psi, J^2 psi, J^3 psi) acting on the last axis."""
        up = np.zeros_like(psi)
        down = np.zeros_like(psi)
        up[..., :-1] = self.ladder * psi[..., 1:]
        down[..., 1:] = self.ladder * psi[..., :-1]
        return np.stack([0.5 * (up + down), -0.5j * (up - down), self.jz * psi])

    def matrices(self) -> np.ndarray:
        """Dense J matrices (for tests)."""
        jp = np.diag(self.ladder, 1).astype(complex)
        jm = jp.T.copy()
        return np.stack([(jp + jm) / 2, (jp - jm) / 2j, np.diag(self.jz).astype(complex)])


def _block_coefficients(field_vec, coupling):
    """2x2 coefficient matrices of -i H in the (central) block structure.

    H = a.(sigma_1 + 2J) + 2/(n-1) sum M[nu,lam] sigma_1^nu J^lam is written
    as C_id + C_z J^3 + C_up J^+ + C_dn J^- with 2x2 matrices acting on the
    central index.  ``coupling`` must already include the 2/(n-1) factor.
    Leading axes of ``coupling`` (and ``field_vec``) are broadcast, giving
    one set of matrices per RK stage.
    """
    coupling = np.asarray(coupling, dtype=float)
    # K_nu = alpha_nu J+ + beta_nu J- + M[nu, 3] J^3
    alpha = 0.5 * (coupling[..., 0] - 1j * coupling[..., 1])
    beta = 0.5 * (coupling[..., 0] + 1j * coupling[..., 1])
    c_z = np.einsum("...m,mab->...ab", coupling[..., 2].astype(complex), PAULIS)
    c_up = np.einsum("...m,mab->...ab", alpha, PAULIS)
    c_dn = np.einsum("...m,mab->...ab", beta, PAULIS)
    c_id = np.zeros_like(c_z)
    if field_vec is not None:
        a = np.asarray(field_vec, dtype=float)
        c_id = c_id + np.einsum("...m,mab->...ab", a.astype(complex), PAULIS)
        c_z = c_z + 2 * a[..., 2, None, None] * I2
        c_up = c_up + (a[..., 0] - 1j * a[..., 1])[..., None, None] * I2
        c_dn = c_dn + (a[..., 0] + 1j * a[..., 1])[..., None, None] * I2
    return -1j * c_id, -1j * c_z, -1j * c_up, -1j * c_dn


def _block_action(spin: CollectiveSpin, psi, coefs):
    """Apply C_id + C_z J^3 + C_up J^+ + C_dn J^- to psi of shape (2, n)."""
    c_id, c_z, c_up, c_dn = coefs
    out = c_id @ psi + c_z @ (spin.jz * psi)
    out[:, :-1] += c_up @ (spin.ladder * psi[:, 1:])
    out[:, 1:] += c_dn @ (spin.ladder * psi[:, :-1])
    return out


def _generator_action(spin: CollectiveSpin, psi, field_vec, coupling):
    """H psi for H = a.(sigma_1 + 2J) + 2/(n-1) sum M[nu,lam] sigma_1^nu J^lam.

    ``field_vec=None`` drops the single-qubit part.
    """
    coefs = _block_coefficients(field_vec, (2.0 / spin.n_rep) * np.asarray(coupling))
    return 1j * _block_action(spin, psi, coefs)


def _rotations(h0, times):
    """adjoint_rotation(exp(-i t h0.sigma)) stacked over t, via Rodrigues' formula."""
    norm = np.linalg.norm(h0)
    n = h0 / norm
    k = np.array([[0, -n[2], n[1]], [n[2], 0, -n[0]], [-n[1], n[0], 0]])
    phi = 2 * norm * np.asarray(times)[:, None, None]
    return np.eye(3) * np.cos(phi) + np.sin(phi) * k + (1 - np.cos(phi)) * np.outer(n, n)


def _rk4_step(spin, psi, h, c0, c_mid, c1):
    """Classical RK4 for dpsi/dt = A(t) psi with A given by block coefficients."""
    k1 = _block_action(spin, psi, c0)
    k2 = _block_action(spin, psi + (0.5 * h) * k1, c_mid)
    k3 = _block_action(spin, psi + (0.5 * h) * k2, c_mid)
    k4 = _block_action(spin, psi + h * k3, c1)
    psi = psi + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
    return psi / np.linalg.norm(psi)


def coherent_init(phi, n: int) -> SectorState:
    """|phi>^{(x) n} in the (central, Dicke) basis.

    psi[a, k] = phi_a sqrt(C(n-1, k)) phi_0^{n-1-k} phi_1^k, with the
    binomial weights evaluated in log space.
    """
    phi = normalized_qubit(phi)
    if n < 2:
        raise InvalidInput(f"need at least 2 qubits, got n={n}")
    n_rep = n - 1
    k = np.arange(n_rep + 1)
    log_binom = np.array([lgamma(n_rep + 1) - lgamma(i + 1) - lgamma(n_rep - i + 1) for i in k])
    with np.errstate(divide="ignore"):
        log_a0, log_a1 = np.log(np.abs(phi))
    # 0 * log(0) is taken as 0 (only k = n-1, resp. k = 0, survives a zero amplitude)
    mag0 = np.multiply(n_rep - k, log_a0, out=np.zeros(n_rep + 1), where=n_rep - k > 0)
    mag1 = np.multiply(k, log_a1, out=np.zeros(n_rep + 1), where=k > 0)
    phase = (n_rep - k) * np.angle(phi[0]) + k * np.angle(phi[1])
    rep = np.exp(0.5 * log_binom + mag0 + mag1 + 1j * phase)
    amps = np.outer(phi, rep)
    return SectorState(n, amps / np.linalg.norm(amps), 0.0)


def sector_apply_h(state, h0, v) -> np.ndarray:
    """H psi on the sector in O(n) work (identity frame)."""
    psi = state.amplitudes if isinstance(state, SectorState) else np.asarray(state, dtype=complex)
    spin = CollectiveSpin(psi.shape[1] - 1)
    return _generator_action(spin, psi, pauli_vector(h0), np.diag(pauli_vector(v)))


def sector_energy(state: SectorState, h0, v) -> float:
    """Lab-frame <H> for couplings (h0, v)."""
    spin = CollectiveSpin(state.n - 1)
    rot = adjoint_rotation(state.frame)
    psi = state.amplitudes
    hpsi = _generator_action(spin, psi, rot.T @ pauli_vector(h0),
                             rot.T @ np.diag(pauli_vector(v)) @ rot)
    return float(np.vdot(psi, hpsi).real)


def sector_propagate(state: SectorState, schedule: Schedule, t_target: float,
                     dt: float | None = None, frame: str = "rotating") -> SectorState:
    """Fixed-step RK4 in the symmetric sector from state.time to t_target.

    ``frame="lab"`` integrates dpsi/dt = -i H psi directly (stiff at large n
    unless h0 = 0).  ``frame="rotating"`` moves the free precession into the
    state's frame unitary exactly and integrates only the interaction.
    Steps split at segment boundaries; the state is renormalized after each
    step.
    """
    if frame not in ("lab", "rotating"):
        raise ValueError(f"unknown frame {frame!r}")
    if t_target < state.time:
        raise ValueError(f"t_target={t_target} precedes state time {state.time}")
    if dt is None:
        dt = default_dt(schedule.bounds())
    spin = CollectiveSpin(state.n - 1)
    psi = state.amplitudes
    w = state.frame.copy()
    for t_a, t_b, h0, v in schedule.pieces(state.time, t_target):
        count, h = substeps(t_a, t_b, dt)
        rot_w = adjoint_rotation(w)
        scale = 2.0 / spin.n_rep
        if frame == "lab" or not h0.any():
            field_vec = rot_w.T @ h0 if frame == "lab" else None
            if field_vec is None and not v.any():
                continue
            coefs = _block_coefficients(field_vec, scale * (rot_w.T @ np.diag(v) @ rot_w))
            for _ in range(count):
                psi = _rk4_step(spin, psi, h, coefs, coefs, coefs)
            continue
        if v.any():
            # interaction-picture coupling at every RK stage time of the piece
            stage_t = np.arange(2 * count + 1) * (0.5 * h)
            rots = _rotations(h0, stage_t) @ rot_w
            couplings = np.einsum("sji,j,sjk->sik", rots, scale * v, rots)
            stages = list(zip(*_block_coefficients(None, couplings)))
            for step in range(count):
                psi = _rk4_step(spin, psi, h, *stages[2 * step:2 * step + 3])
        w = su2_exp(h0, t_b - t_a) @ w
    return SectorState(state.n, psi, float(t_target), w)


def sector_reduced_central(state: SectorState) -> np.ndarray:
    """rho^c_ab = sum_k psi[a,k] conj(psi[b,k]), rotated into the lab frame."""
    psi = state.amplitudes
    rho = psi @ psi.conj().T
    return check_density(state.frame @ rho @ state.frame.conj().T)


def sector_reduced_pair(state: SectorState) -> np.ndarray:
    """Reduced density on (central, one replica), central as the high bit.

    One replica is split off the Dicke space with
    |N, k> = sqrt((N-k)/N) |0>|N-1, k> + sqrt(k/N) |1>|N-1, k-1>, N = n-1.
    """
    if state.n < 3:
        raise InvalidInput("sector_reduced_pair needs n >= 3; use the full density for n = 2")
    n_rep = state.n - 1
    k = np.arange(n_rep + 1)
    alpha = np.sqrt((n_rep - k) / n_rep)
    beta = np.sqrt(k / n_rep)
    psi = state.amplitudes
    phi = np.empty((2, 2, n_rep), dtype=complex)
    phi[:, 0, :] = psi[:, :-1] * alpha[:-1]
    phi[:, 1, :] = psi[:, 1:] * beta[1:]
    m = phi.reshape(4, n_rep)
    rho = m @ m.conj().T
    return check_density(kron_unitary_conj(rho, state.frame))


def wigner_rotation(n_rep: int, u) -> np.ndarray:
    """Matrix of u^{(x) n_rep} restricted to the Dicke states, in the k basis.

    Uses the polynomial picture |b> -> z^{#ones(b)}: a Dicke state maps to
    sqrt(C(N,k)) z^k and u^{(x)N} maps it to
    sqrt(C(N,k)) (u00 + u10 z)^{N-k} (u01 + u11 z)^k.  Exact, but only for
    moderate n_rep.
    """
    from numpy.polynomial import polynomial as P

    u = np.asarray(u, dtype=complex)
    p0 = np.array([u[0, 0], u[1, 0]])
    p1 = np.array([u[0, 1], u[1, 1]])
    log_c = np.array([lgamma(n_rep + 1) - lgamma(k + 1) - lgamma(n_rep - k + 1)
                      for k in range(n_rep + 1)])
    d = np.zeros((n_rep + 1, n_rep + 1), dtype=complex)
    for k in range(n_rep + 1):
        poly = P.polymul(P.polypow(p0, n_rep - k), P.polypow(p1, k))
        poly = np.pad(poly, (0, n_rep + 1 - len(poly)))
        d[:, k] = poly * np.exp(0.5 * (log_c[k] - log_c))
    return d


def _dicke_tables(n_rep: int):
    ones = np.array([bin(i).count("1") for i in range(2 ** n_rep)])
    norms = np.array([np.exp(0.5 * (lgamma(n_rep + 1) - lgamma(k + 1) - lgamma(n_rep - k + 1)))
                      for k in range(n_rep + 1)])
    return ones, norms


def embed_amplitudes(amplitudes, n: int) -> np.ndarray:
    """Full 2^n vector for (2, n) sector amplitudes given in the identity frame."""
    ones, norms = _dicke_tables(n - 1)
    return (np.asarray(amplitudes)[:, ones] / norms[ones]).reshape(-1)


def embed(state: SectorState) -> np.ndarray:
    """Full 2^n amplitude vector of a sector state (lab frame, small n)."""
    return embed_amplitudes(state.lab().amplitudes, state.n)


def project(amplitudes, n: int) -> np.ndarray:
    """Project a full amplitude vector onto the (central, Dicke) basis."""
    n_rep = n - 1
    ones, norms = _dicke_tables(n_rep)
    full = np.asarray(amplitudes).reshape(2, -1)
    out = np.zeros((2, n_rep + 1), dtype=complex)
    for a in range(2):
        out[a] = (np.bincount(ones, weights=full[a].real, minlength=n_rep + 1)
                  + 1j * np.bincount(ones, weights=full[a].imag, minlength=n_rep + 1))
    return out / norms
