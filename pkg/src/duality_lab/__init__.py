"""Central spin model versus its single-qubit nonlinear mean-field picture."""

from .duality import (
    BoundViolation, DegeneratePair, DualityRun, FitUndefined, ScalingReport, bbgky_residual,
    covariance_bound, covariance_check, es_bound, expansive_demo, lr_bound, lr_check,
    run_duality, scaling_fit,
)
from .exact_full import (
    FullState, apply_h, expectation, product_init, propagate, reduced_central, reduced_pair,
)
from .exact_symmetric import (
    CollectiveSpin, SectorState, coherent_init, sector_apply_h, sector_propagate,
    sector_reduced_central, sector_reduced_pair,
)
from .meanfield import (
    MeanFieldTrajectory, UndefinedFrequency, h_eff, mf_integrate, mf_rhs, replica_driven_flow,
    torsion_frequency,
)
from .pauli import (
    InvalidInput, SmallOperator, bloch_from_density, density_from_bloch, trace_distance,
    trace_norm,
)
from .schedules import OutOfRange, Schedule, ScheduleBounds, default_dt

__version__ = "0.1.0"
