from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from capsteiner.core import Instance, NotADag, PreconditionError, check_feasible_tree, normalize_lengths, normalize_terminals
from capsteiner.large_cap import (
    ReducedTreeParams,
    check_shortpath_property,
    complete_reduced_tree,
    first_branch_vertex,
    is_reduced_tree_dag,
    is_reduced_tree_uniform,
    merge_trees,
    solve_cmin_k_minus_1,
    solve_cmin_k_minus_1_fixed_k,
    solve_dag_large_cap,
    solve_uniform_k_minus_kappa,
    w_bound,
    witness_quadruple,
)
from capsteiner.oracle import oracle_mlcst
from capsteiner.suites import random_instance

seeds = st.integers(0, 10**6)


def value(sol):
    return None if sol is None else sol.total_length


@given(seeds, st.integers(0, 2))
def test_uniform_large_cap_against_oracle(seed, kappa):
    K = 4
    inst = random_instance(seed, "undirected", n=7, K=K, capacity=K - kappa)
    want = oracle_mlcst(inst)
    dec = solve_uniform_k_minus_kappa(inst, mode="decision")
    assert (dec is None) == (want is None)
    if dec is not None:
        assert check_feasible_tree(inst, dec).ok
    rep = solve_uniform_k_minus_kappa(inst)
    if want is None:
        assert rep is None
    else:
        assert check_feasible_tree(inst, rep.solution).ok
        assert rep.solution.total_length <= rep.guarantee * want.total_length


@given(seeds, st.integers(1, 2))
def test_dag_large_cap_against_oracle(seed, kappa):
    K = 4
    inst = random_instance(seed, "dag", n=7, K=K, capacity=lambda r: r.randint(K - kappa, K))
    want = oracle_mlcst(inst)
    dec = solve_dag_large_cap(inst, kappa, mode="decision")
    assert (dec is None) == (want is None)
    rep = solve_dag_large_cap(inst, kappa)
    if want is not None:
        assert check_feasible_tree(inst, rep.solution).ok
        assert rep.solution.total_length <= rep.guarantee * want.total_length


def test_large_cap_preconditions():
    with pytest.raises(NotADag):
        solve_dag_large_cap(random_instance(0, "digraph", K=2, capacity=2))
    with pytest.raises(PreconditionError):
        solve_dag_large_cap(random_instance(0, "dag", K=4, capacity=1), kappa=1)
    with pytest.raises(PreconditionError):
        solve_uniform_k_minus_kappa(random_instance(0, "undirected", K=4, capacity=2), kappa=1)
    with pytest.raises(PreconditionError):
        solve_cmin_k_minus_1(random_instance(0, "undirected", K=4, capacity=2))


def test_params_lambda():
    inst = random_instance(0, "dag", K=3, capacity=2)
    p = ReducedTreeParams.of(inst, 2)
    assert p.Lambda == 27 and p.c_min == 2
    assert p.E_K == frozenset()


def fork():
    # root 1 -> 2, then 2 -> 3 and 2 -> 4; terminals 3, 4, 5 with 5 hanging off 1
    edges = [(1, 2, 1, 2), (2, 3, 1, 2), (2, 4, 1, 2), (1, 5, 1, 2)]
    return Instance.build("dag", 5, edges, 1, [3, 4, 5])


def test_reduced_tree_predicates():
    inst = fork()
    # root arc (1, 2) carries 2 of the 2 spanned terminals: no slack
    assert not is_reduced_tree_uniform(inst, [(1, 2), (2, 3), (2, 4)], 1)
    assert is_reduced_tree_uniform(inst, [(1, 2), (2, 3), (1, 5)], 1)
    assert not is_reduced_tree_uniform(inst, [], 1)
    assert is_reduced_tree_uniform(inst, [], 0)
    assert not is_reduced_tree_uniform(inst, [(2, 3)], 0)
    # an arc of capacity 2 with K = 3 needs one spanned terminal off its side
    assert is_reduced_tree_dag(inst, [(1, 2), (2, 3), (1, 5)], 1)
    assert not is_reduced_tree_dag(inst, [(1, 2), (2, 3)], 1)


def test_complete_and_merge():
    inst = fork()
    sol = complete_reduced_tree(inst, [(1, 5)])
    assert check_feasible_tree(inst, sol).ok and sol.total_length == 4
    assert sorted(merge_trees(inst, [(1, 2), (2, 3)], [(1, 2), (2, 4), (1, 5)])) == [(1, 2), (1, 5), (2, 3), (2, 4)]


def test_first_branch_vertex_and_witness():
    edges = [(1, 2, 1, 3), (2, 3, 1, 3), (3, 4, 1, 2), (3, 5, 1, 2), (5, 6, 1, 2), (5, 7, 1, 2)]
    inst = Instance.build("dag", 7, edges, 1, [4, 6, 7])
    arcs = [(1, 2), (2, 3), (3, 4), (3, 5), (5, 6), (5, 7)]
    assert first_branch_vertex(inst, arcs) == (3, [1, 2, 3])
    w, ti, tj, W = witness_quadruple(inst, arcs)
    assert w == 3 and {ti, tj} == {4, 6} and W == frozenset({5})
    assert check_shortpath_property(inst, arcs)
    with pytest.raises(PreconditionError):
        first_branch_vertex(Instance.build("dag", 3, [(1, 2, 1, 1), (2, 3, 1, 1)], 1, [2, 3]), [(1, 2), (2, 3)])


@pytest.mark.parametrize("K, want", [(2, 0), (3, 2), (4, 2), (5, 3), (8, 4), (16, 6)])
def test_w_bound(K, want):
    assert w_bound(K) == want


def k1_instance(seed, kind, K=4):
    inst = random_instance(seed, kind, n=7, K=K, capacity=lambda r: r.choice([K - 1, K]))
    return inst if inst.c_min == K - 1 else inst.replace(edges=(inst.edges[0]._replace(capacity=K - 1),) + inst.edges[1:])


@given(seeds, st.sampled_from(["undirected", "digraph", "dag"]))
def test_cmin_k_minus_1_fixed_k_is_exact(seed, kind):
    inst = k1_instance(seed, kind)
    got = solve_cmin_k_minus_1_fixed_k(inst, with_witness=True)
    want = oracle_mlcst(inst)
    assert value(got and got.solution) == value(want)
    if got is not None and got.quadruple is not None:
        assert len(got.quadruple[3]) <= w_bound(inst.K)


@given(seeds, st.sampled_from(["undirected", "digraph", "dag"]))
def test_optimal_trees_have_the_shortpath_shape(seed, kind):
    inst = k1_instance(seed, kind)
    scaled, _ = normalize_lengths(inst)
    norm = normalize_terminals(scaled, capacity=inst.c_min)
    sol = solve_cmin_k_minus_1_fixed_k(norm)
    if sol is not None:
        assert check_shortpath_property(norm, sol)
        assert witness_quadruple(norm, sol)[0] == first_branch_vertex(norm, sol)[0]


@given(seeds, st.sampled_from(["undirected", "digraph"]))
def test_cmin_k_minus_1_general(seed, kind):
    inst = k1_instance(seed, kind)
    want = oracle_mlcst(inst)
    dec = solve_cmin_k_minus_1(inst, mode="decision")
    assert (dec is None) == (want is None)
    rep = solve_cmin_k_minus_1(inst)
    if want is not None:
        assert rep.guarantee == Fraction(2)
        assert rep.solution.total_length <= 2 * want.total_length
