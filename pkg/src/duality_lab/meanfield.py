"""Nonlinear single-qubit master equation and Bloch-ball torsion.

    dX/dt = -i [H_eff(X), X],   H_eff(X) = H0 + sum_mu v_mu tr(X sigma^mu) sigma^mu

For X = (I + r.sigma)/2 this is the Bloch flow

    dr/dt = 2 (h0 + v * r) x r        (* elementwise, x cross product)

which preserves |r| exactly.  Integration is fixed-step RK4 on r with the
same step policy as the exact simulators, renormalizing |r| to 1 after each
step.  All array functions broadcast over leading axes of r so that whole
sets of initial conditions can be pushed through the flow at once.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._stepping import substeps
from .pauli import (
    InvalidInput, bloch_from_density, check_density, commutator, density_from_bloch,
    from_pauli, normalized_qubit, pauli_vector, pure_density,
)
from .schedules import Schedule, default_dt


class UndefinedFrequency(ValueError):
    """The transverse motion is too small to define a rotation rate."""


@dataclass
class MeanFieldTrajectory:
    times: np.ndarray
    bloch: np.ndarray       # shape (len(times), ..., 3)
    schedule: Schedule

    def density(self, i: int) -> np.ndarray:
        return density_from_bloch(self.bloch[i])

    def densities(self):
        return [density_from_bloch(r) for r in self.bloch]

    def purity(self) -> np.ndarray:
        """tr X^2 = (1 + |r|^2)/2 at every sample."""
        return 0.5 * (1 + np.sum(self.bloch ** 2, axis=-1))


def h_eff(x, h0, v) -> np.ndarray:
    """H0 + sum_mu v_mu tr(X sigma^mu) sigma^mu as a 2x2 matrix."""
    r = bloch_from_density(x)
    return from_pauli(pauli_vector(h0) + pauli_vector(v) * r)


def mf_rhs(x, h0, v) -> np.ndarray:
    """-i [H_eff(X), X] in matrix form."""
    x = check_density(x)
    return -1j * commutator(h_eff(x, h0, v), x)


def bloch_rhs(r, h0, v) -> np.ndarray:
    """2 (h0 + v * r) x r, broadcasting over leading axes."""
    return 2.0 * np.cross(h0 + v * r, r)


def _rk4_bloch(r, h0, v, h):
    k1 = bloch_rhs(r, h0, v)
    k2 = bloch_rhs(r + 0.5 * h * k1, h0, v)
    k3 = bloch_rhs(r + 0.5 * h * k2, h0, v)
    k4 = bloch_rhs(r + h * k3, h0, v)
    r = r + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return r / np.linalg.norm(r, axis=-1, keepdims=True)


def _rk4_bloch_single(r, h0, v, h):
    """Same step as _rk4_bloch for one vector, on Python floats (numpy call overhead
    dominates at this size)."""
    hx, hy, hz = h0
    vx, vy, vz = v

    def f(x, y, z):
        ax, ay, az = hx + vx * x, hy + vy * y, hz + vz * z
        return 2 * (ay * z - az * y), 2 * (az * x - ax * z), 2 * (ax * y - ay * x)

    x, y, z = r
    k1 = f(x, y, z)
    k2 = f(x + 0.5 * h * k1[0], y + 0.5 * h * k1[1], z + 0.5 * h * k1[2])
    k3 = f(x + 0.5 * h * k2[0], y + 0.5 * h * k2[1], z + 0.5 * h * k2[2])
    k4 = f(x + h * k3[0], y + h * k3[1], z + h * k3[2])
    c = h / 6.0
    x += c * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    y += c * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    z += c * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
    norm = math.sqrt(x * x + y * y + z * z)
    return x / norm, y / norm, z / norm


def _initial_bloch(phi):
    phi = np.asarray(phi)
    if phi.shape[-1] == 3 and np.isrealobj(phi):
        r = np.asarray(phi, dtype=float)
        if np.any(np.abs(np.linalg.norm(r, axis=-1) - 1) > 1e-9):
            raise InvalidInput("initial Bloch vectors must be unit length (pure states)")
        return r
    return bloch_from_density(pure_density(normalized_qubit(phi)))


def _check_grid(t_grid, schedule):
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) == 0:
        raise InvalidInput("time grid must be a non-empty 1-d array")
    if np.any(np.diff(t_grid) < 0) or t_grid[0] < 0 or t_grid[-1] > schedule.horizon:
        raise InvalidInput("time grid must be increasing and inside the schedule range")
    return t_grid


def bloch_flow(r0, schedule: Schedule, t_grid, dt: float | None = None) -> np.ndarray:
    """Bloch vectors on t_grid for initial vectors r0 of shape (..., 3)."""
    t_grid = _check_grid(t_grid, schedule)
    if dt is None:
        dt = default_dt(schedule.bounds())
    r = np.array(r0, dtype=float)
    out = np.empty((len(t_grid),) + r.shape)
    single = r.shape == (3,)
    if single:
        r = tuple(float(x) for x in r)
    t = 0.0
    for i, t_next in enumerate(t_grid):
        for t_a, t_b, h0, v in schedule.pieces(t, t_next):
            count, h = substeps(t_a, t_b, dt)
            if single:
                h0, v = tuple(h0.tolist()), tuple(v.tolist())
                for _ in range(count):
                    r = _rk4_bloch_single(r, h0, v, h)
            else:
                for _ in range(count):
                    r = _rk4_bloch(r, h0, v, h)
        t = t_next
        out[i] = r
    return out


def mf_integrate(phi, schedule: Schedule, t_grid, dt: float | None = None) -> MeanFieldTrajectory:
    """Integrate the nonlinear master equation from X(0) = |phi><phi|.

    ``phi`` is a normalized 2-vector or a unit Bloch vector (or a stack of
    unit Bloch vectors).
    """
    t_grid = _check_grid(t_grid, schedule)
    r0 = _initial_bloch(phi)
    return MeanFieldTrajectory(t_grid, bloch_flow(r0, schedule, t_grid, dt), schedule)


def free_flow(r0, schedule: Schedule, t_grid) -> np.ndarray:
    """Exact v = 0 evolution: rotation by the single-qubit field only."""
    from .pauli import adjoint_rotation, su2_exp

    t_grid = _check_grid(t_grid, schedule)
    r0 = np.asarray(r0, dtype=float)
    out = np.empty((len(t_grid),) + r0.shape)
    u = np.eye(2, dtype=complex)
    t = 0.0
    for i, t_next in enumerate(t_grid):
        for t_a, t_b, h0, _ in schedule.pieces(t, t_next):
            u = su2_exp(h0, t_b - t_a) @ u
        t = t_next
        # X(t) = u X0 u^dagger, so r_mu(t) = tr(X0 u^dagger sigma^mu u) = (O(u) r0)_mu
        out[i] = r0 @ adjoint_rotation(u).T
    return out


def replica_driven_flow(r0, schedule: Schedule, t_grid, dt: float | None = None) -> np.ndarray:
    """Central Bloch vector driven by freely precessing replicas.

    Each replica couples to the central qubit with strength 1/(n-1), so as
    n grows the replicas follow the free field h0 alone, while the central
    qubit feels their summed order parameter:

        dr_rep/dt = 2 h0 x r_rep,   dr/dt = 2 (h0 + v * r_rep) x r

    Returns the central Bloch vectors on t_grid.
    """
    t_grid = _check_grid(t_grid, schedule)
    if dt is None:
        dt = default_dt(schedule.bounds())
    r = np.array(r0, dtype=float)
    rep = r.copy()
    out = np.empty((len(t_grid),) + r.shape)

    def rhs(state, h0, v):
        c, q = state
        return np.stack([2.0 * np.cross(h0 + v * q, c), 2.0 * np.cross(h0, q)])

    state = np.stack([r, rep])
    t = 0.0
    for i, t_next in enumerate(t_grid):
        for t_a, t_b, h0, v in schedule.pieces(t, t_next):
            count, h = substeps(t_a, t_b, dt)
            for _ in range(count):
                k1 = rhs(state, h0, v)
                k2 = rhs(state + 0.5 * h * k1, h0, v)
                k3 = rhs(state + 0.5 * h * k2, h0, v)
                k4 = rhs(state + h * k3, h0, v)
                state = state + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
                state /= np.linalg.norm(state, axis=-1, keepdims=True)
        t = t_next
        out[i] = state[0]
    return out


def transverse_phase(bloch, axis: int) -> tuple:
    """Unwrapped rotation angle about ``axis`` (1, 2 or 3) and the transverse radius."""
    if axis not in (1, 2, 3):
        raise InvalidInput(f"axis must be 1, 2 or 3, got {axis}")
    a, b = axis % 3, (axis + 1) % 3
    bloch = np.asarray(bloch)
    radius = np.hypot(bloch[..., a], bloch[..., b])
    phase = np.unwrap(np.arctan2(bloch[..., b], bloch[..., a]), axis=0)
    return phase, radius


def torsion_frequency(traj: MeanFieldTrajectory, axis: int, min_amplitude: float = 1e-6) -> float:
    """Angular frequency of the motion transverse to ``axis``.

    Least-squares slope of the unwrapped transverse phase against time.  A
    positive value is a right-handed rotation about the axis.
    """
    phase, radius = transverse_phase(traj.bloch, axis)
    if phase.ndim != 1:
        raise InvalidInput("torsion_frequency expects a single trajectory")
    if radius.min() < min_amplitude:
        raise UndefinedFrequency(
            f"transverse amplitude {radius.min():.2e} below {min_amplitude:.0e}")
    if len(traj.times) < 3:
        raise InvalidInput("need at least 3 samples to fit a frequency")
    slope, _ = np.polyfit(traj.times, phase, 1)
    return float(slope)


def torsion_probe(x0: float, min_amplitude: float = 1e-3) -> np.ndarray:
    """Unit Bloch vector (x0, 0, sqrt(1 - x0^2)) for probing x-torsion.

    |x0| is capped so the transverse radius never drops below
    ``min_amplitude``; at |x0| = 1 the probe sits a hair off the pole and
    rotates at 2 v1 x0 to within min_amplitude**2 / 2 relative.
    """
    cap = np.sqrt(1 - min_amplitude ** 2)
    x = float(np.clip(x0, -cap, cap))
    return np.array([x, 0.0, np.sqrt(1 - x * x)])


def measure_torsion(v1: float, x0: float, periods: float = 3.0, samples_per_period: int = 64,
                    dt: float = 1e-3) -> dict:
    """Run the pure x-torsion flow from the probe at x0 and fit its rotation rate.

    The window spans ``periods`` full turns at the expected rate 2 v1 x0
    (or a fixed 3-unit window when that rate vanishes).
    """
    r0 = torsion_probe(x0)
    expected = 2 * v1 * r0[0]
    horizon = periods * 2 * np.pi / abs(expected) if abs(expected) > 1e-9 else 3.0
    n_samples = int(np.ceil(periods * samples_per_period)) + 1
    schedule = Schedule.constant([0, 0, 0], [v1, 0, 0], horizon)
    t_grid = np.linspace(0, horizon, n_samples)
    traj = mf_integrate(r0, schedule, t_grid, dt=min(dt, horizon / n_samples))
    omega = torsion_frequency(traj, axis=1)
    return {"x0": float(x0), "x_used": float(r0[0]), "omega": omega,
            "expected": float(2 * v1 * x0), "horizon": horizon}
