from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from capsteiner.core import (
    Instance,
    PreconditionError,
    check_feasible_tree,
    compute_loads,
    extract_skeleton,
    make_solution,
    normalize_lengths,
    normalize_terminals,
    property1_bound,
    restore_solution,
    skeleton_of_arcs,
    to_digraph,
    validate_instance,
)
from capsteiner.oracle import oracle_mlcst
from capsteiner.suites import random_instance

from helpers import ROOMY

seeds = st.integers(0, 10**6)
kinds = st.sampled_from(["digraph", "dag", "undirected"])


def small(kind="digraph"):
    # 1 -> 2 -> {3, 4}, plus a direct arc 1 -> 4
    edges = [(1, 2, 1, 2), (2, 3, 1, 1), (2, 4, 2, 1), (1, 4, 5, 1)]
    return Instance.build(kind, 4, edges, 1, [3, 4])


def test_undirected_arcs_list_both_orientations():
    inst = small("undirected")
    assert len(inst.arcs) == 2 * len(inst.edges)
    assert (2, 1) in inst.arc_map and (1, 2) in inst.arc_map
    assert inst.arc_map[(2, 1)].edge == inst.arc_map[(1, 2)].edge


def test_arc_lengths_are_ints_when_integral():
    inst = Instance.build("dag", 3, [(1, 2, Fraction(3, 1), 1), (1, 3, Fraction(1, 2), 1)], 1, [2, 3])
    assert type(inst.arcs[0].length) is int
    assert inst.arcs[1].length == Fraction(1, 2)


def test_c_min_c_max_and_degree():
    inst = small()
    assert (inst.c_min, inst.c_max) == (1, 2)
    assert inst.degree[4] == 2 and inst.K == 2


@pytest.mark.parametrize(
    "edges, kind, root, terms, violation",
    [
        ([(1, 2, 1, 1), (1, 2, 2, 1), (1, 3, 1, 1)], "digraph", 1, [2, 3], "parallel edge"),
        ([(1, 2, 1, 0), (1, 3, 1, 1)], "digraph", 1, [2, 3], "capacity must be positive"),
        ([(1, 2, -1, 1), (1, 3, 1, 1)], "digraph", 1, [2, 3], "length must be nonnegative"),
        ([(1, 2, 1, 1), (2, 3, 1, 1), (3, 2, 1, 1)], "dag", 1, [2, 3], "directed cycle"),
        ([(1, 2, 1, 1), (3, 2, 1, 1)], "digraph", 1, [2, 3], "not reachable"),
        ([(1, 2, 1, 1), (1, 3, 1, 1)], "digraph", 1, [1, 3], "root cannot be a terminal"),
        ([(1, 2, 1, 1), (1, 3, 1, 1)], "digraph", 1, [2], "at least two terminals"),
        ([(1, 2, 1, 1), (1, 9, 1, 1)], "digraph", 1, [2, 3], "out of range"),
        ([(1, 1, 1, 1), (1, 2, 1, 1), (1, 3, 1, 1)], "digraph", 1, [2, 3], "self-loop"),
    ],
)
def test_validation_reports(edges, kind, root, terms, violation):
    report = validate_instance(Instance.build(kind, 3, edges, root, terms))
    assert not report.ok
    assert violation in str(report)


def test_antiparallel_arcs_are_fine_in_digraphs():
    inst = Instance.build("digraph", 3, [(1, 2, 1, 1), (2, 1, 1, 1), (1, 3, 1, 1)], 1, [2, 3])
    assert validate_instance(inst).ok


def test_feasible_tree_and_loads():
    inst = small()
    report = check_feasible_tree(inst, [(1, 2), (2, 3), (2, 4)])
    assert report.ok
    assert report.loads == {(1, 2): 2, (2, 3): 1, (2, 4): 1}


@pytest.mark.parametrize(
    "arcs, kind",
    [
        ([(1, 2), (2, 3), (1, 4), (2, 4)], "not-a-tree"),
        ([(1, 2), (2, 3)], "unreachable-terminal"),
        ([(1, 2), (3, 2), (2, 3), (1, 4)], "not-a-tree"),
        ([(1, 2), (2, 3), (4, 2)], "bad-orientation"),
    ],
)
def test_infeasible_trees(arcs, kind):
    assert kind in check_feasible_tree(small(), arcs).kinds()


def test_capacity_violation_detail():
    inst = small().with_capacities(1)
    report = check_feasible_tree(inst, [(1, 2), (2, 3), (2, 4)])
    assert report.kinds() == {"capacity-exceeded"}
    assert "(1,2) carries 2 terminals, capacity 1" in str(report)


def test_detached_cycle_reported_as_cycle():
    inst = Instance.build("digraph", 4, [(1, 2, 1, 2), (1, 3, 1, 1), (3, 4, 1, 1), (4, 3, 1, 1)], 1, [2, 3])
    report = check_feasible_tree(inst, [(1, 2), (3, 4), (4, 3)])
    assert "cycle" in report.kinds()


@given(seeds, kinds)
def test_loads_agree_with_checker(seed, kind):
    inst = random_instance(seed, kind, n=7, K=3, capacity=3)
    sol = oracle_mlcst(inst)
    assert sol is not None
    report = check_feasible_tree(inst, sol)
    assert report.ok
    assert compute_loads(sol.arcs, inst.terminals) == report.loads
    assert report.loads[next(a for a in sol.arcs if a[0] == inst.root)] >= 1


@given(seeds, kinds, st.integers(1, 3))
def test_normalize_terminals_keeps_the_optimum(seed, kind, cap):
    inst = random_instance(seed, kind, n=6, K=3, capacity=cap)
    norm = normalize_terminals(inst)
    assert validate_instance(norm).ok
    assert all(norm.degree[t] == 1 for t in norm.terminals)
    a, b = oracle_mlcst(inst), oracle_mlcst(norm, ROOMY)
    assert (a is None) == (b is None)
    if a is not None:
        assert a.total_length == b.total_length
        back = restore_solution(inst, norm, b)
        assert check_feasible_tree(inst, back).ok
        assert back.total_length == a.total_length


def test_normalize_terminals_is_identity_on_leaf_terminals():
    inst = Instance.build("undirected", 3, [(1, 2, 1, 1), (1, 3, 1, 1)], 1, [2, 3])
    assert normalize_terminals(inst) is inst


def test_normalize_terminals_prunes_dangling_paths():
    inst = Instance.build("undirected", 5, [(1, 2, 1, 1), (1, 3, 1, 1), (3, 4, 1, 1), (4, 5, 1, 1)], 1, [2, 3])
    norm = normalize_terminals(inst)
    assert all(4 not in (e.u, e.v) and 5 not in (e.u, e.v) for e in norm.edges)
    assert norm.terminals == (2, 6)


@given(seeds, kinds)
def test_normalize_lengths_keeps_optimal_trees(seed, kind):
    inst = random_instance(seed, kind, n=6, K=3, capacity=2, lengths=(0, 3))
    scaled, factor = normalize_lengths(inst)
    assert all(e.length > 0 and e.length.denominator == 1 for e in scaled.edges)
    opt, base = oracle_mlcst(scaled), oracle_mlcst(inst)
    assert (opt is None) == (base is None)
    # an optimum of the scaled instance is an optimum of the original
    if opt is not None:
        assert make_solution(inst, opt.arcs).total_length == base.total_length
    assert factor > 0


def test_to_digraph_doubles_edges():
    d = to_digraph(small("undirected"))
    assert d.kind == "digraph" and len(d.edges) == 8
    with pytest.raises(PreconditionError):
        to_digraph(d)


def test_skeleton_contracts_paths():
    # r=1 -> 2 -> 3 (branch) -> {4 -> 5 (terminal), 6 (terminal)}
    arcs = [(1, 2), (2, 3), (3, 4), (4, 5), (3, 6)]
    sk = skeleton_of_arcs(1, arcs, [5, 6])
    assert sorted(sk.arcs) == [(1, 3), (3, 5), (3, 6)]
    assert sk.root_degree == 1 and sk.n_R == 4 and sk.K == 2
    assert sk.n_R <= property1_bound(2, sk.root_degree)
    assert sk.l_min == 3


def test_skeleton_rejects_dangling_steiner_leaf():
    with pytest.raises(PreconditionError):
        skeleton_of_arcs(1, [(1, 2), (1, 3)], [2])


def test_extract_skeleton_from_solution():
    inst = small()
    sol = make_solution(inst, [(1, 2), (2, 3), (2, 4)])
    sk = extract_skeleton(sol, inst)
    assert sk.below == {1: 2, 2: 2, 3: 1, 4: 1}
