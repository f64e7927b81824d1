"""Exact distribution of the largest eigenvalue of ``W1 W2^{-1}`` under a rank-one spike.

``W1 ~ CW_m(p, I + eta u u^H)`` and ``W2 ~ CW_m(n, I)`` are independent
complex Wishart matrices. The package evaluates the CDF of the largest
eigenvalue as a small determinant, maps it to the largest-root detector
(false alarm, detection, ROC, sample-count design) and cross-checks
everything against a seeded Monte Carlo simulator.
"""

__version__ = "0.1.0"

from .exceptions import DegenerateInputError, DomainError, FactorizationError, NumericalError
from .distribution import (
    EnsembleParams,
    Spike,
    cdf_max_eig,
    cdf_max_eig_alpha0,
    cdf_precision_check,
    joint_density,
    null_joint_density,
)
from .detector import (
    DetectorParams,
    RocCurve,
    cdf_quantile,
    db_to_linear,
    detection_probability,
    false_alarm_probability,
    linear_to_db,
    optimal_p_approx,
    optimal_p_bounds,
    optimal_p_exact,
    roc_balanced,
    roc_curve,
    threshold_for_pf,
)
from .montecarlo import EigSampleSet, SimConfig, empirical_cdf, ks_statistic, simulate_max_eig

__all__ = [
    "DegenerateInputError", "DomainError", "FactorizationError", "NumericalError",
    "EnsembleParams", "Spike", "cdf_max_eig", "cdf_max_eig_alpha0", "cdf_precision_check",
    "joint_density", "null_joint_density",
    "DetectorParams", "RocCurve", "cdf_quantile", "db_to_linear", "detection_probability",
    "false_alarm_probability", "linear_to_db", "optimal_p_approx", "optimal_p_bounds",
    "optimal_p_exact", "roc_balanced", "roc_curve", "threshold_for_pf",
    "EigSampleSet", "SimConfig", "empirical_cdf", "ks_statistic", "simulate_max_eig",
]
