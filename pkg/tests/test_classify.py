import pytest

from capsteiner.classify import ClassifierConfig, classify_instance
from capsteiner.core import Instance


def hub(kind, K, caps, length=lambda u, v: 1):
    """Root 1, hubs 2 and 3, terminals 4..K+3; ``caps`` gives the capacity of edge i."""
    pairs = [(1, 2), (1, 3), (2, 3)] + [(2 + (t % 2), t) for t in range(4, K + 4)]
    edges = [(u, v, length(u, v), caps(i)) for i, (u, v) in enumerate(pairs)]
    return Instance.build(kind, K + 3, edges, 1, range(4, K + 4))


const = lambda c: lambda i: c  # noqa: E731
alt = lambda a, b: lambda i: a if i % 2 else b  # noqa: E731
varied = lambda u, v: (u + v) % 3 + 1  # noqa: E731


@pytest.mark.parametrize("kind, K, caps, length, leaf, verdict", [
    ("digraph", 3, const(1), varied, 1, "polynomial"),
    ("undirected", 2, alt(1, 2), varied, 2, "polynomial"),
    ("undirected", 7, const(7), varied, 3, "np-hard"),
    ("dag", 7, alt(6, 7), varied, 4, "approximable"),
    ("dag", 7, alt(6, 7), lambda u, v: 0, 4, "polynomial"),
    ("digraph", 3, alt(2, 3), varied, 5, "polynomial"),
    ("digraph", 4, alt(1, 3), varied, 6, "np-hard"),
    ("undirected", 4, alt(1, 3), varied, 7, "np-hard"),
    ("undirected", 8, const(2), varied, 8, "np-hard"),
    ("undirected", 7, const(5), varied, 9, "approximable"),
    ("undirected", 7, const(5), lambda u, v: 0, 9, "polynomial"),
    ("undirected", 4, const(2), varied, 10, "open"),
    ("dag", 4, alt(1, 2), varied, 11, "polynomial"),
    ("dag", 8, alt(1, 2), varied, 12, "np-hard"),
    ("dag", 7, alt(5, 7), varied, 13, "approximable"),
])
def test_leaves(kind, K, caps, length, leaf, verdict):
    label = classify_instance(hub(kind, K, caps, length))
    assert (label.leaf_id, label.verdict) == (leaf, verdict)
    assert label.graph_kind == kind


def test_ratios_and_algorithms():
    assert classify_instance(hub("undirected", 7, const(5), varied)).ratio == "rho+rho'"
    assert classify_instance(hub("dag", 7, alt(5, 7), varied)).chosen_algorithm == "dag-large-cap"
    assert classify_instance(hub("digraph", 4, alt(1, 3), varied)).chosen_algorithm == "oracle-only"


def test_kappa_hint_lifts_the_cap():
    inst = hub("dag", 8, alt(1, 2), varied)
    assert classify_instance(inst).leaf_id == 12
    # a hint below the real slack is ignored
    assert classify_instance(inst, kappa_hint=2).leaf_id == 12
    label = classify_instance(inst, kappa_hint=7)
    assert label.leaf_id == 13 and label.parameters["kappa"] == 7


def test_config_changes_the_fixed_k_threshold():
    inst = hub("dag", 4, alt(1, 2), varied)
    assert classify_instance(inst, config=ClassifierConfig(fixed_k_bound=3)).leaf_id == 13
    assert classify_instance(inst, config=ClassifierConfig(fixed_k_bound=3, kappa_max=2)).leaf_id == 12


def test_as_dict_key_order():
    d = classify_instance(hub("digraph", 3, const(1), varied)).as_dict()
    assert list(d) == ["leaf_id", "graph_kind", "verdict", "ratio", "chosen_algorithm", "parameters"]
    assert d["parameters"]["capacities"] == "unit"
