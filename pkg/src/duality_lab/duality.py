"""Checks of the linear/nonlinear correspondence.

Compares the mean-field trajectory X(t) against the exact central-qubit
density rho_c(t) of the n-qubit model, evaluates the finite-n error bound

    ||X(t) - rho_c(t)||_1 <= (6 v_star / v_m) (exp(8 v_m t) - 1) / (n - 1)

and samples the commutator (Lieb-Robinson) and covariance estimates that
the bound is built from.  Trace norms carry no 1/2 prefactor.
"""

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import exact_full as ef
from . import exact_symmetric as es
from .meanfield import MeanFieldTrajectory, bloch_flow, mf_integrate
from .pauli import (
    InvalidInput, SmallOperator, bloch_distance, bloch_from_density, commutator,
    from_pauli, normalized_qubit, pair_interaction, partial_trace_second, trace_norm,
)
from .schedules import OutOfRange, Schedule, ScheduleBounds, default_dt

log = logging.getLogger(__name__)

ENGINES = ("symmetric", "full", "auto")
# full engine is used for n up to this size when engine="auto"
AUTO_FULL_MAX = 12


class FitUndefined(ValueError):
    """Too few usable points for a scaling fit."""


class DegeneratePair(ValueError):
    """Two states are too close to define a distance ratio."""


class BoundViolation(AssertionError):
    """A sampled quantity exceeded its bound."""


def es_bound(t: float, n: int, b: ScheduleBounds) -> float:
    """(6 v_star / v_m) (e^{8 v_m t} - 1) / (n - 1); zero when v_m = 0."""
    if t < 0 or n < 2:
        raise InvalidInput(f"need t >= 0 and n >= 2, got t={t}, n={n}")
    if b.v_m == 0:
        return 0.0
    return (6 * b.v_star / b.v_m) * np.expm1(8 * b.v_m * t) / (n - 1)


def lr_bound(t: float, n: int, b: ScheduleBounds) -> float:
    """(e^{4 v_m t} - 1) / (n - 1)."""
    return float(np.expm1(4 * b.v_m * t) / (n - 1))


def covariance_bound(t: float, n: int, b: ScheduleBounds) -> float:
    """(e^{8 v_m t} - 1) / (n - 1), per unit ||K1||_1 ||K2||_1."""
    return float(np.expm1(8 * b.v_m * t) / (n - 1))


def resolve_engine(engine: str, n: int) -> str:
    if engine not in ENGINES:
        raise InvalidInput(f"unknown engine {engine!r}; expected one of {ENGINES}")
    if engine == "auto":
        return "full" if n <= AUTO_FULL_MAX else "symmetric"
    return engine


def exact_central_series(phi, schedule: Schedule, n: int, t_grid, engine: str = "symmetric",
                         dt: float | None = None) -> np.ndarray:
    """Central-qubit Bloch vectors of the exact model on t_grid."""
    engine = resolve_engine(engine, n)
    if dt is None:
        dt = default_dt(schedule.bounds())
    out = []
    if engine == "full":
        state = ef.product_init(phi, n)
        for t in t_grid:
            state = ef.propagate(state, schedule, t, dt)
            out.append(bloch_from_density(ef.reduced_central(state)))
    else:
        state = es.coherent_init(phi, n)
        for t in t_grid:
            state = es.sector_propagate(state, schedule, t, dt)
            out.append(bloch_from_density(es.sector_reduced_central(state)))
    return np.array(out)


@dataclass
class DualityRun:
    schedule: Schedule
    phi: np.ndarray
    n: int
    t_grid: np.ndarray
    engine: str
    dt: float
    mf: MeanFieldTrajectory
    exact_bloch: np.ndarray
    distances: np.ndarray
    bound_values: np.ndarray
    tolerance: float = 0.0
    violations: list = field(default_factory=list)

    @property
    def margins(self) -> np.ndarray:
        return self.bound_values - self.distances

    @property
    def violated(self) -> bool:
        return bool(self.violations)


def run_duality(phi, schedule: Schedule, n: int, t_grid, engine: str = "symmetric",
                dt: float | None = None, estimate_error: bool = True) -> DualityRun:
    """Trace distance between mean-field and exact central states on t_grid.

    With ``estimate_error`` both pictures are rerun at twice the step and
    the Richardson estimate |d(dt) - d(2 dt)| / 15 sets the integrator
    tolerance; bound violations are only reported beyond 10x that.
    """
    phi = normalized_qubit(phi)
    t_grid = np.asarray(t_grid, dtype=float)
    engine = resolve_engine(engine, n)
    if dt is None:
        dt = default_dt(schedule.bounds())
    mf = mf_integrate(phi, schedule, t_grid, dt)
    exact = exact_central_series(phi, schedule, n, t_grid, engine, dt)
    distances = bloch_distance(mf.bloch, exact)
    b = schedule.bounds()
    bound_values = np.array([es_bound(t, n, b) for t in t_grid])
    tol = 0.0
    if estimate_error:
        coarse_mf = bloch_flow(_bloch_of(phi), schedule, t_grid, 2 * dt)
        coarse = exact_central_series(phi, schedule, n, t_grid, engine, 2 * dt)
        tol = float(np.max(np.abs(distances - bloch_distance(coarse_mf, coarse)), initial=0) / 15)
    slack = 10 * tol + 1e-12
    violations = [int(i) for i in np.nonzero(distances > bound_values + slack)[0]]
    if violations:
        log.warning("bound exceeded at %d grid points (n=%d)", len(violations), n)
    return DualityRun(schedule, phi, n, t_grid, engine, dt, mf, exact, distances,
                      bound_values, tol, violations)


def _bloch_of(phi):
    phi = normalized_qubit(phi)
    return bloch_from_density(np.outer(phi, phi.conj()))


@dataclass
class ScalingReport:
    t_fixed: float
    n_values: list
    distances: list
    fitted_slope: float
    fitted_intercept: float
    used: list = field(default_factory=list)
    tolerances: list = field(default_factory=list)


def fit_loglog(n_values, distances, tolerances=None, t_fixed: float = float("nan")) -> ScalingReport:
    """Least-squares slope of log(distance) against log(n - 1).

    Points with distance below 10x their integrator tolerance are dropped
    with a warning; fewer than 3 survivors raise :class:`FitUndefined`.
    """
    n_values = [int(n) for n in n_values]
    distances = [float(d) for d in distances]
    if len(n_values) != len(distances):
        raise InvalidInput("n_values and distances differ in length")
    if any(b <= a for a, b in zip(n_values, n_values[1:])):
        raise InvalidInput("n_values must be strictly increasing")
    if tolerances is None:
        tolerances = [0.0] * len(n_values)
    used = [d > max(10 * tol, 1e-300) for d, tol in zip(distances, tolerances)]
    dropped = [n for n, ok in zip(n_values, used) if not ok]
    if dropped:
        warnings.warn(f"excluded n={dropped}: distance below 10x integrator tolerance")
    xs = np.log([n - 1 for n, ok in zip(n_values, used) if ok])
    ys = np.log([d for d, ok in zip(distances, used) if ok])
    if len(xs) < 3:
        raise FitUndefined(f"only {len(xs)} usable points (need 3)")
    slope, intercept = np.polyfit(xs, ys, 1)
    return ScalingReport(t_fixed, n_values, distances, float(slope), float(intercept),
                         used, list(tolerances))


def _scaling_point(args):
    phi, schedule, n, t_fixed, engine, dt = args
    run = run_duality(phi, schedule, n, [t_fixed], engine=engine, dt=dt)
    return float(run.distances[-1]), run.tolerance


def scaling_fit(phi, schedule: Schedule, n_list, t_fixed: float, engine: str = "symmetric",
                dt: float | None = None, workers: int | None = None) -> ScalingReport:
    """Distance at t_fixed for each n, then the log-log slope against n - 1."""
    from .parallel import parallel_map

    n_list = [int(n) for n in n_list]
    if len(n_list) < 3 or min(n_list) < 8:
        raise InvalidInput("scaling_fit needs at least 3 values of n, all >= 8")
    jobs = [(phi, schedule, n, t_fixed, engine, dt) for n in n_list]
    results = parallel_map(_scaling_point, jobs, workers)
    return fit_loglog(n_list, [d for d, _ in results], [tol for _, tol in results], t_fixed)


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    """G + G^dagger with i.i.d. standard complex Gaussian entries."""
    g = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    return g + g.conj().T


@dataclass
class LRResult:
    max_ratio: float
    bound: float
    max_operator_ratio: float
    ratios: np.ndarray
    seed: int


def lr_check(schedule: Schedule, n: int, k: int, t: float, samples: int, rng_seed: int,
             check: bool = True) -> LRResult:
    """Sampled estimate of the commutator growth C_k(t) against (e^{4 v_m t} - 1)/(n-1).

    A acts on qubits 1..k and B on qubit k+1 (k <= 2).  Each sample gives
    ||[U^dag A U, B]||_1 / (||A||_1 ||B||_1) with all three trace norms taken
    on the full 2^n register.  ``max_operator_ratio`` additionally reports the
    largest singular value of the commutator over the local trace norms of A
    and B, a stricter normalization that must also stay under the bound.
    """
    if k not in (1, 2):
        raise InvalidInput(f"lr_check supports k in (1, 2), got k={k}")
    if not 1 <= k <= n - 1:
        raise InvalidInput(f"need 1 <= k <= n-1, got k={k}, n={n}")
    rng = np.random.default_rng(rng_seed)
    u = ef.dense_propagator(n, schedule, t)
    bound = lr_bound(t, n, schedule.bounds())
    ratios = np.empty(samples)
    op_ratios = np.empty(samples)
    eye_rest_a = np.eye(2 ** (n - k))
    for i in range(samples):
        a = random_hermitian(rng, 2 ** k)
        b = random_hermitian(rng, 2)
        a_full = np.kron(a, eye_rest_a)
        b_full = np.kron(np.kron(np.eye(2 ** k), b), np.eye(2 ** (n - k - 1)))
        a_t = u.conj().T @ a_full @ u
        # i[A, B] is Hermitian, so eigenvalues give the singular values
        sv = np.abs(np.linalg.eigvalsh(1j * commutator(a_t, b_full)))
        local_a, local_b = trace_norm(a), trace_norm(b)
        ratios[i] = sv.sum() / (local_a * 2 ** (n - k) * local_b * 2 ** (n - 1))
        op_ratios[i] = sv.max() / (local_a * local_b)
    result = LRResult(float(ratios.max(initial=0)), bound, float(op_ratios.max(initial=0)),
                      ratios, rng_seed)
    if check and (result.max_ratio > bound + 1e-12 or result.max_operator_ratio > bound + 1e-12):
        raise BoundViolation(f"commutator ratio {result.max_ratio:.3e} / "
                             f"{result.max_operator_ratio:.3e} exceeds bound {bound:.3e}")
    return result


@dataclass
class CovarianceResult:
    max_violation_margin: float     # min over samples of (bound - |cov|)
    bound_per_norm: float
    max_normalized_cov: float
    seed: int
    violations: int = 0


def covariance_check(phi, schedule: Schedule, n: int, t: float, samples: int, rng_seed: int,
                     dt: float | None = None, check: bool = True) -> CovarianceResult:
    """|<K1 K2> - <K1><K2>| <= ||K1||_1 ||K2||_1 (e^{8 v_m t} - 1)/(n - 1) on random K1, K2.

    K1 acts on the central qubit, K2 on the first replica; norms are the
    2x2 trace norms.  Returns the worst margin (bound - |covariance|); a
    sample only counts as a violation beyond round-off (1e-12 per unit norm).
    """
    state = ef.propagate(ef.product_init(phi, n), schedule, t, dt)
    rho12 = ef.reduced_pair(state)
    rho1 = partial_trace_second(rho12)
    rho2 = np.einsum("jajb->ab", rho12.reshape(2, 2, 2, 2))
    rng = np.random.default_rng(rng_seed)
    per_norm = covariance_bound(t, n, schedule.bounds())
    worst = np.inf
    worst_ratio = 0.0
    violations = 0
    for _ in range(samples):
        k1 = random_hermitian(rng, 2)
        k2 = random_hermitian(rng, 2)
        joint = np.trace(rho12 @ np.kron(k1, k2)).real
        cov = joint - np.trace(rho1 @ k1).real * np.trace(rho2 @ k2).real
        norms = trace_norm(k1) * trace_norm(k2)
        margin = norms * per_norm - abs(cov)
        worst = min(worst, margin)
        worst_ratio = max(worst_ratio, abs(cov) / norms)
        violations += margin < -1e-12 * norms
    result = CovarianceResult(float(worst), per_norm, worst_ratio, rng_seed, int(violations))
    if check and result.violations:
        raise BoundViolation(f"covariance exceeds bound in {violations} of {samples} samples "
                             f"(worst by {-result.max_violation_margin:.3e})")
    return result


def covariance_full(state: ef.FullState, k1, k2) -> float:
    """Covariance from full-register expectation values (independent of reduced densities)."""
    op1 = SmallOperator(k1, (0,))
    op2 = SmallOperator(k2, (1,))
    return (ef.expectation(state, [op1, op2])
            - ef.expectation(state, [op1]) * ef.expectation(state, [op2]))


def bbgky_rhs(rho_c, rho12, h0, v) -> np.ndarray:
    """-i[H0, rho_c] - i tr_2 [V_12, rho_12]."""
    h = from_pauli(h0)
    return -1j * commutator(h, rho_c) - 1j * partial_trace_second(commutator(pair_interaction(v), rho12))


def bbgky_residual(phi, schedule: Schedule, n: int, t: float, delta: float = 1e-3,
                   engine: str = "symmetric", dt: float | None = None) -> float:
    """||(rho_c(t+d) - rho_c(t-d)) / 2d - BBGKY right-hand side at t||_1."""
    if t - delta < 0 or t + delta > schedule.horizon:
        raise OutOfRange(f"t={t} within delta={delta} of the schedule edge")
    if schedule.segment_index(t - delta) != schedule.segment_index(t + delta):
        raise OutOfRange(f"[t - delta, t + delta] straddles a schedule breakpoint")
    engine = resolve_engine(engine, n)
    if dt is None:
        dt = default_dt(schedule.bounds())
    h0, v = schedule.sample(t)
    if engine == "full":
        state = ef.propagate(ef.product_init(phi, n), schedule, t - delta, dt)
        before = ef.reduced_central(state)
        state = ef.propagate(state, schedule, t, dt)
        rho_c, rho12 = ef.reduced_central(state), ef.reduced_pair(state)
        after = ef.reduced_central(ef.propagate(state, schedule, t + delta, dt))
    else:
        if n < 3:
            raise InvalidInput("symmetric-engine BBGKY residual needs n >= 3")
        state = es.sector_propagate(es.coherent_init(phi, n), schedule, t - delta, dt)
        before = es.sector_reduced_central(state)
        state = es.sector_propagate(state, schedule, t, dt)
        rho_c, rho12 = es.sector_reduced_central(state), es.sector_reduced_pair(state)
        after = es.sector_reduced_central(es.sector_propagate(state, schedule, t + delta, dt))
    derivative = (after - before) / (2 * delta)
    return trace_norm(derivative - bbgky_rhs(rho_c, rho12, h0, v))


def expansive_demo(phi_a, phi_b, schedule: Schedule, t_grid, dt: float | None = None) -> np.ndarray:
    """d(t)/d(0) for two mean-field trajectories, d the trace distance."""
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid[0] != 0:
        t_grid = np.concatenate([[0.0], t_grid])
    ra, rb = _bloch_of(phi_a), _bloch_of(phi_b)
    d0 = float(np.linalg.norm(ra - rb))
    if d0 < 1e-8:
        raise DegeneratePair(f"initial distance {d0:.2e} too small")
    flow = bloch_flow(np.stack([ra, rb]), schedule, t_grid, dt)
    return bloch_distance(flow[:, 0], flow[:, 1]) / d0
