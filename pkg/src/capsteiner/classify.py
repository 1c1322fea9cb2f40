"""Which complexity case an instance falls in, and which solver handles it.

The walk is fixed: unit capacities, then K = 2, then c_min >= K - 1, then
the graph-kind specific branches.  Leaves are numbered 1..13 and each comes
with a verdict (polynomial, approximable, np-hard, open) and the solver the
CLI dispatches to; hard leaves get "oracle-only".
"""

from __future__ import annotations

from dataclasses import dataclass, field

from capsteiner.core import Instance
from capsteiner.fixed_k import FIXED_K_BOUND

KAPPA_MAX = 3

VERDICTS = ("polynomial", "approximable", "np-hard", "open")


@dataclass(frozen=True)
class ClassifierConfig:
    fixed_k_bound: int = FIXED_K_BOUND
    kappa_max: int = KAPPA_MAX


@dataclass(frozen=True)
class CaseLabel:
    leaf_id: int
    graph_kind: str
    verdict: str
    chosen_algorithm: str
    ratio: str | None = None  # symbolic guarantee for approximable leaves, e.g. "1+rho"
    parameters: dict = field(default_factory=dict, compare=False)

    def as_dict(self) -> dict:
        return {
            "leaf_id": self.leaf_id,
            "graph_kind": self.graph_kind,
            "verdict": self.verdict,
            "ratio": self.ratio,
            "chosen_algorithm": self.chosen_algorithm,
            "parameters": self.parameters,
        }


def _lengths_class(inst: Instance) -> str:
    values = {e.length for e in inst.edges}
    if values == {0}:
        return "zero"
    return "uniform" if len(values) == 1 else "general"


def _capacity_class(inst: Instance) -> str:
    caps = {e.capacity for e in inst.edges}
    if caps == {1}:
        return "unit"
    return "uniform" if len(caps) == 1 else "nonuniform"


def classify_instance(inst: Instance, kappa_hint: int | None = None, config: ClassifierConfig = ClassifierConfig()) -> CaseLabel:
    """Deterministic case label for a valid instance.

    ``kappa_hint`` (if at least the inferred slack ``K - c_min``) is used as
    the slack for the large-capacity leaves and lifts the ``kappa_max`` cap.
    """
    K = inst.K
    kind = inst.kind
    caps = _capacity_class(inst)
    lengths = _lengths_class(inst)
    c_min = inst.c_min
    fixed = K <= config.fixed_k_bound
    kappa = max(0, K - c_min)
    kappa_ok = kappa <= config.kappa_max
    if kappa_hint is not None and kappa_hint >= kappa:
        kappa, kappa_ok = kappa_hint, True
    params = {
        "K": K,
        "fixed_k": fixed,
        "capacities": caps,
        "c_min": c_min,
        "c_max": inst.c_max,
        "kappa": kappa,
        "lengths": lengths,
    }

    def label(leaf, verdict, algo, ratio=None):
        return CaseLabel(leaf, kind, verdict, algo, ratio, params)

    zero = lengths == "zero"
    if caps == "unit":
        return label(1, "polynomial", "unit-cap")
    if K == 2:
        return label(2, "polynomial", "cmin-k1-fixed")
    if c_min >= K - 1:
        if fixed:
            return label(5, "polynomial", "cmin-k1-fixed")
        if c_min >= K and not zero:
            # capacities never bind: this is plain Steiner tree
            return label(3, "np-hard", "cmin-k1")
        if zero:
            return label(4, "polynomial", "cmin-k1")
        return label(4, "approximable", "cmin-k1", "1+rho")
    if kind == "digraph":
        return label(6, "np-hard", "oracle-only")
    if kind == "undirected":
        if caps != "uniform":
            return label(7, "np-hard", "oracle-only")
        if fixed:
            return label(10, "open", "uniform-fixed-k")
        if kappa_ok:
            if zero:
                return label(9, "polynomial", "uniform-kappa")
            return label(9, "approximable", "uniform-kappa", "rho+rho'")
        return label(8, "np-hard", "oracle-only")
    if fixed:
        return label(11, "polynomial", "dag-fixed-k")
    if kappa_ok:
        if zero:
            return label(13, "polynomial", "dag-large-cap")
        return label(13, "approximable", "dag-large-cap", "1+rho")
    return label(12, "np-hard", "oracle-only")
