import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from capsteiner.core import NotADag, PreconditionError
from capsteiner.disjoint_paths import LabVdpInstance, VdpInstance, check_paths, labvdp_dag_dp, vdisj_search
from capsteiner.oracle import oracle_vdisj
from capsteiner.reductions import random_vdp

from helpers import ROOMY, random_labvdp

seeds = st.integers(0, 10**6)


def total(rep):
    return None if rep is None else rep.total_length


def oracle_total(inst):
    got = oracle_vdisj(inst, ROOMY)
    return None if got is None else got[1]


def random_topological_order(inst, rng):
    indeg = {v: 0 for v in range(1, inst.n + 1)}
    out = {v: [] for v in indeg}
    for e in inst.edges:
        indeg[e.v] += 1
        out[e.u].append(e.v)
    ready = [v for v, d in indeg.items() if d == 0]
    order = []
    while ready:
        u = ready.pop(rng.randrange(len(ready)))
        order.append(u)
        for v in out[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                ready.append(v)
    return order


@given(seeds)
def test_dag_dp_matches_oracle(seed):
    inst = random_labvdp(seed, n_max=10)
    rep = labvdp_dag_dp(inst)
    assert total(rep) == oracle_total(inst)
    if rep is not None:
        assert check_paths(inst, rep.paths) == rep.total_length


@given(seeds, seeds)
def test_dag_dp_ignores_topological_order(seed, order_seed):
    inst = random_labvdp(seed, n_max=10)
    order = random_topological_order(inst, random.Random(order_seed))
    assert total(labvdp_dag_dp(inst, order)) == total(labvdp_dag_dp(inst))


@given(seeds, st.sampled_from(["undirected", "digraph", "dag"]), st.integers(2, 3))
def test_search_matches_oracle_unlabelled(seed, kind, p):
    base = random_vdp(seed, kind, n=7, p=p, density=0.4)
    inst = base.as_labelled()
    rep = vdisj_search(inst)
    assert total(rep) == oracle_total(base)
    feasible = vdisj_search(inst, use_lengths=False)
    assert (feasible is None) == (rep is None)
    if rep is not None:
        assert check_paths(inst, rep.paths) == rep.total_length


@given(seeds)
def test_search_matches_dp_with_labels(seed):
    inst = random_labvdp(seed, n_max=10)
    assert total(vdisj_search(inst)) == total(labvdp_dag_dp(inst))


def test_labels_restrict_paths():
    # the short route uses a label-1 arc, which pair 0 may not use
    edges = [(1, 2, 1, 1), (2, 3, 1, 1), (1, 4, 5, 2), (4, 3, 5, 2)]
    free = LabVdpInstance.build("dag", 4, edges, [(1, 3)])
    picky = LabVdpInstance.build("dag", 4, edges, [(1, 3)], [{2}])
    assert labvdp_dag_dp(free).total_length == 2
    assert labvdp_dag_dp(picky).total_length == 10
    assert labvdp_dag_dp(picky).paths == ((1, 4, 3),)


def test_endpoints_of_other_pairs_are_off_limits():
    edges = [(1, 3, 1, 1), (3, 2, 1, 1), (1, 4, 9, 1), (4, 2, 9, 1)]
    inst = LabVdpInstance.build("dag", 5, edges + [(3, 5, 1, 1)], [(1, 2), (3, 5)])
    assert labvdp_dag_dp(inst).total_length == 19


def test_dp_rejects_undirected_and_bad_orders():
    inst = LabVdpInstance.build("undirected", 3, [(1, 2, 1, 1)], [(1, 2)])
    with pytest.raises(NotADag):
        labvdp_dag_dp(inst)
    dag = LabVdpInstance.build("dag", 3, [(1, 2, 1, 1), (2, 3, 1, 1)], [(1, 3)])
    with pytest.raises(NotADag):
        labvdp_dag_dp(dag, [3, 2, 1])


def test_validation():
    with pytest.raises(PreconditionError):
        labvdp_dag_dp(LabVdpInstance.build("dag", 3, [(1, 2, 1, 1)], [(1, 2), (2, 3)]))
    with pytest.raises(PreconditionError):
        labvdp_dag_dp(LabVdpInstance.build("dag", 3, [(1, 2, 1, 5)], [(1, 2)], k=2))


def test_check_paths_rejects_bad_systems():
    inst = VdpInstance.build("undirected", 4, [(1, 2, 1), (2, 3, 1), (3, 4, 1)], [(1, 2), (3, 4)]).as_labelled()
    assert check_paths(inst, [[1, 2], [3, 4]]) == 2
    with pytest.raises(ValueError):
        check_paths(inst, [[1, 2], [3, 2, 4]])
    with pytest.raises(ValueError):
        check_paths(inst, [[1, 2]])
    with pytest.raises(ValueError):
        check_paths(inst, [[1, 3], [3, 4]])
