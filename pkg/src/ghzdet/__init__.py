"""Joint-distribution feasibility of three-particle correlations and a
detector-inefficiency model of the corresponding coincidence experiment."""

from .detector import DetectorParams, RateSpec
from .lhv import (
    CorrelationSet,
    FeasibilityReport,
    JointDistribution8,
    SymmetricParams,
    check_inequalities,
    construct_symmetric_joint,
    epsilon_feasible,
    expectations_from_joint,
    feasible_oracle,
    mermin_f,
)
from .montecarlo import RunConfig, RunStats, compare_analytic, run
from .quantum import ghz_state, ghz_witness, operator_expectation, sample_outcomes

__all__ = [
    "CorrelationSet",
    "DetectorParams",
    "FeasibilityReport",
    "JointDistribution8",
    "RateSpec",
    "RunConfig",
    "RunStats",
    "SymmetricParams",
    "check_inequalities",
    "compare_analytic",
    "construct_symmetric_joint",
    "epsilon_feasible",
    "expectations_from_joint",
    "feasible_oracle",
    "ghz_state",
    "ghz_witness",
    "mermin_f",
    "operator_expectation",
    "run",
    "sample_outcomes",
]

__version__ = "0.1.0"
