"""Exact and approximate solvers for the rooted edge-capacitated Steiner tree problem."""

from capsteiner.core import (
    CapSteinerError,
    Edge,
    FeasibilityReport,
    Infeasible,
    Instance,
    LimitExceeded,
    NotADag,
    PreconditionError,
    Skeleton,
    SteinerSolution,
    ValidationReport,
    check_feasible_tree,
    extract_skeleton,
    make_solution,
    normalize_lengths,
    normalize_terminals,
    to_digraph,
    validate_instance,
)

__all__ = [
    "CapSteinerError",
    "Edge",
    "FeasibilityReport",
    "Infeasible",
    "Instance",
    "LimitExceeded",
    "NotADag",
    "PreconditionError",
    "Skeleton",
    "SteinerSolution",
    "ValidationReport",
    "check_feasible_tree",
    "extract_skeleton",
    "make_solution",
    "normalize_lengths",
    "normalize_terminals",
    "to_digraph",
    "validate_instance",
]

__version__ = "0.1.0"
