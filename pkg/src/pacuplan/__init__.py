"""Start-of-day recovery-bed occupancy forecasting and surgical case sequencing."""

__version__ = "0.1.0"

from .distributions import (
    LognormalParams,
    lognormal_cdf,
    moment_match_sum,
    poisson_binomial_cdf,
    poisson_binomial_cdf_oracle,
    poisson_binomial_pmf,
)
from .forecast import (
    OccupancyCurve,
    exact_occupancy_cdf,
    expected_occupancy,
    in_recovery_prob,
    occupancy_curve,
    occupancy_variance,
    support_upper_bound,
    time_grid,
)
from .model import (
    FEASIBILITY_EPS,
    Instance,
    Patient,
    Schedule,
    Surgeon,
    Violation,
    check_feasibility,
    compute_overtime,
    derive_pairwise,
    max_expected_occupancy,
)
from .simulation import (
    CoverageStats,
    EmpiricalCurve,
    GenSpec,
    coverage_stats,
    generate_instance,
    monte_carlo_curve,
    sample_day,
)
from .solver import (
    SAConfig,
    SolveReport,
    baseline_schedule,
    construct_schedule,
    simulated_annealing,
    swap_neighbor,
)

__all__ = [
    "__version__",
    "LognormalParams",
    "lognormal_cdf",
    "moment_match_sum",
    "poisson_binomial_cdf",
    "poisson_binomial_cdf_oracle",
    "poisson_binomial_pmf",
    "OccupancyCurve",
    "exact_occupancy_cdf",
    "expected_occupancy",
    "in_recovery_prob",
    "occupancy_curve",
    "occupancy_variance",
    "support_upper_bound",
    "time_grid",
    "FEASIBILITY_EPS",
    "Instance",
    "Patient",
    "Schedule",
    "Surgeon",
    "Violation",
    "check_feasibility",
    "compute_overtime",
    "derive_pairwise",
    "max_expected_occupancy",
    "CoverageStats",
    "EmpiricalCurve",
    "GenSpec",
    "coverage_stats",
    "generate_instance",
    "monte_carlo_curve",
    "sample_day",
    "SAConfig",
    "SolveReport",
    "baseline_schedule",
    "construct_schedule",
    "simulated_annealing",
    "swap_neighbor",
]
