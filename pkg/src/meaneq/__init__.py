"""Solutions of the weighted quasi-arithmetic mean functional equation.

``phi((x+y)/2) (f(x) + f(y)) = phi(x) f(x) + phi(y) f(y)`` and the derived
equation ``G(g(u) - g(v)) = H(h(u) + h(v)) + F(u) + F(v)``: closed-form
families, residual checks, differential invariants, parameter recovery and
the change of variables between the two equations.
"""

from .calculus import InvariantReport, finite_diff, invariant_report, wronskian
from .estimators import PairSolutionClassifier, TripleSolutionClassifier
from .exceptions import (
    DegenerateData,
    DegenerateParams,
    DiscontinuousPhi,
    DomainMismatch,
    DomainViolation,
    EmptyJ,
    FNearZero,
    IllConditioned,
    IntervalError,
    MeanEqError,
    NonMonotoneEll,
    NotMonotone,
    OutOfDomain,
    SupportNotContained,
    TooFewPoints,
    Unclassifiable,
    ZeroInDomain,
)
from .families import (
    ClosedFormPair,
    ClosedFormTriple,
    FlatPair,
    PairCase,
    PairParams,
    TripleCase,
    TripleParams,
    basis,
    build_flat_pair,
    build_pair,
    build_triple,
    evaluate,
)
from .fitting import PairFit, TripleFit, classify_pair, classify_triple, estimate_gamma, fit_coefficients
from .functions import GridFunction, RealFunction
from .intervals import (
    Interval,
    IntervalUnion,
    half_sum,
    regularity_holds,
    sum_with_interval,
    zero_set,
)
from .reduction import GhfSystem, ReducedSystem, invert_monotone, lift_g0h, reduce_ghf
from .residuals import (
    ResidualReport,
    dfg,
    residual_eq1,
    residual_g0h,
    residual_ghf,
    sup_residual,
)

__version__ = "0.1.0"

__all__ = [
    "ClosedFormPair",
    "ClosedFormTriple",
    "DegenerateData",
    "DegenerateParams",
    "DiscontinuousPhi",
    "DomainMismatch",
    "DomainViolation",
    "EmptyJ",
    "FNearZero",
    "FlatPair",
    "GhfSystem",
    "GridFunction",
    "IllConditioned",
    "Interval",
    "IntervalError",
    "IntervalUnion",
    "InvariantReport",
    "MeanEqError",
    "NonMonotoneEll",
    "NotMonotone",
    "OutOfDomain",
    "PairCase",
    "PairFit",
    "PairParams",
    "PairSolutionClassifier",
    "RealFunction",
    "ReducedSystem",
    "ResidualReport",
    "SupportNotContained",
    "TooFewPoints",
    "TripleCase",
    "TripleFit",
    "TripleParams",
    "TripleSolutionClassifier",
    "Unclassifiable",
    "ZeroInDomain",
    "__version__",
    "basis",
    "build_flat_pair",
    "build_pair",
    "build_triple",
    "classify_pair",
    "classify_triple",
    "dfg",
    "estimate_gamma",
    "evaluate",
    "finite_diff",
    "fit_coefficients",
    "half_sum",
    "invariant_report",
    "invert_monotone",
    "lift_g0h",
    "reduce_ghf",
    "regularity_holds",
    "residual_eq1",
    "residual_g0h",
    "residual_ghf",
    "sum_with_interval",
    "sup_residual",
    "wronskian",
    "zero_set",
]
