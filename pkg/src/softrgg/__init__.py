"""One-dimensional soft random geometric graphs: sampling, disconnection diagnosis and theory."""
from .analysis import DiagnosisReport, diagnose, find_isolated, find_uncrossed_gaps
from .connection import (
    ConnectionFunction,
    GeneralizedExponential,
    Hard,
    Tabulated,
    evaluate,
    generalized_inverse,
    l1_norm,
    make_connection,
    mean_degree,
    rayleigh,
    solve_rc_for_mean_degree,
    waxman,
    with_scale,
)
from .errors import (
    AssumptionViolatedError,
    DegenerateInputError,
    InfeasibleTargetError,
    InvalidParameterError,
    ModeMismatchError,
    SoftRGGError,
    UnsupportedFamilyError,
    UnsupportedRegimeError,
)
from .graph import GraphSample, connected_components, sample_graph
from .montecarlo import SweepAxis, SweepConfig, SweepResult, compare_theory, run_sweep, run_trial, wilson_interval
from .point_process import BoundaryMode, PointSet, derive_seed, distance, sample_ppp

__version__ = "0.1.0"
