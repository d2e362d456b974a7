"""Invariant means of two-variable mean-type mappings.

Build a pair of means, iterate it, and compute the lower, upper, limit-like
and transfinite invariant means, or test candidate means against the pair.
"""

from .core import (COMPARABLE_LE, STRICT, SYMMETRIC, Grid, Interval, Mean, MeanPair,
                   PropertyReport, check_properties, convex_combine, make_builtin,
                   make_example_pair, make_kc, meet_join)
from .errors import (ConvergenceError, DomainError, InvariantMeansError, MeanBoundsError,
                     MeanEvalError, MeanSyntaxError, OrbitError, PreconditionError)
from .expr import MeanExpr, evaluate, lift_to_mean, parse, parse_mean, to_source
from .lab import (check_phi_decomposition, check_symmetry_of_invariant, invariance_residual,
                  ordering_check)
from .limitlike import (EventuallyPeriodic, LimitLikeSpec, apply_phi, bo_mean,
                        check_two_limit_like, four_periodic)
from .orbit import ConvergencePolicy, OrbitTrace, iterate, lower_upper, trace_rows
from .transfinite import (StagePolicy, TransfiniteReport, probe_continuous_uniqueness,
                          stage_mean, transfinite_iterate, transfinite_mean)

__all__ = [
    "COMPARABLE_LE", "STRICT", "SYMMETRIC", "ConvergenceError", "ConvergencePolicy",
    "DomainError", "EventuallyPeriodic", "Grid", "Interval", "InvariantMeansError",
    "LimitLikeSpec", "Mean", "MeanBoundsError", "MeanEvalError", "MeanExpr", "MeanPair",
    "MeanSyntaxError", "OrbitError", "OrbitTrace", "PreconditionError", "PropertyReport",
    "StagePolicy", "TransfiniteReport", "apply_phi", "bo_mean", "check_phi_decomposition",
    "check_properties", "check_symmetry_of_invariant", "check_two_limit_like",
    "convex_combine", "evaluate", "four_periodic", "invariance_residual", "iterate",
    "lift_to_mean", "lower_upper", "make_builtin", "make_example_pair", "make_kc",
    "meet_join", "ordering_check", "parse", "parse_mean", "probe_continuous_uniqueness",
    "stage_mean", "to_source", "trace_rows", "transfinite_iterate", "transfinite_mean",
]
