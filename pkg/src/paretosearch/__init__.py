"""Toolkit for collecting and analyzing human black-box search behavior.

Players query hidden 2-D test functions through a click-to-score game; the
analysis side asks, for every recorded decision, whether it was Pareto
rational in the (expected improvement, uncertainty) plane of a GP surrogate,
then summarizes behavior with decile signatures, Wasserstein distances and
clusters, and a decision-tree explainer.
"""

from .errors import (
    EmptyDataset,
    EmptyRecords,
    InsufficientHistory,
    InvalidDistribution,
    InvalidK,
    InvalidSpec,
    MismatchedSupport,
    OutOfBounds,
    ParetoSearchError,
    ParseError,
    SchemaError,
    SessionFinished,
    SingularCovariance,
    UnknownProblem,
    UnknownSession,
    UnknownSubject,
)
from .gp import FAMILIES, GpPosterior, KernelSpec, fit, kernel_value
from .rationality import (
    MEASURES,
    ObjectivePair,
    ParetoFront,
    UncertaintyMeasure,
    acr,
    classify,
    distance_to_front,
    evaluate_decision,
    frontier_for,
    pareto_front,
)
from .testbed import PROBLEM_IDS, TestProblem, get_problem, list_problems, score
from .wasserstein import (
    DiscreteDistribution,
    TransportPlan,
    barycenter,
    emd,
    wst_1d,
    wst_kmeans,
)

__version__ = "0.1.0"

__all__ = [
    "EmptyDataset",
    "EmptyRecords",
    "InsufficientHistory",
    "InvalidDistribution",
    "InvalidK",
    "InvalidSpec",
    "MismatchedSupport",
    "OutOfBounds",
    "ParetoSearchError",
    "ParseError",
    "SchemaError",
    "SessionFinished",
    "SingularCovariance",
    "UnknownProblem",
    "UnknownSession",
    "UnknownSubject",
    "FAMILIES",
    "GpPosterior",
    "KernelSpec",
    "fit",
    "kernel_value",
    "MEASURES",
    "ObjectivePair",
    "ParetoFront",
    "UncertaintyMeasure",
    "acr",
    "classify",
    "distance_to_front",
    "evaluate_decision",
    "frontier_for",
    "pareto_front",
    "PROBLEM_IDS",
    "TestProblem",
    "get_problem",
    "list_problems",
    "score",
    "DiscreteDistribution",
    "TransportPlan",
    "barycenter",
    "emd",
    "wst_1d",
    "wst_kmeans",
    "__version__",
]
