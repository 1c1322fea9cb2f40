"""Exact solvers for a fixed number of terminals, via skeletons and disjoint paths.

Every potential skeleton is expanded into a labelled disjoint-paths instance:
each skeleton vertex gets one copy per incident skeleton arc, each skeleton
arc ``(u, v)`` becomes the pair ``(u_v, v_u)``, and a path for that pair may
only use arcs whose capacity is at least the number of terminals below ``v``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import partial

from capsteiner.core import (
    Instance,
    NotADag,
    PreconditionError,
    SteinerSolution,
    check_feasible_tree,
    make_solution,
    normalize_terminals,
    restore_solution,
)
from capsteiner.disjoint_paths import LabVdpInstance, labvdp_dag_dp, vdisj_search
from capsteiner.graphs import adjacency, dijkstra
from capsteiner.parallel import best_of, worker_count
from capsteiner.skeletons import PotentialSkeleton, enumerate_potential_skeletons, reachability

FIXED_K_BOUND = 6


@dataclass(frozen=True)
class SkeletonExpansion:
    skeleton: PotentialSkeleton
    copy_map: dict  # skeleton vertex -> {neighbour: copy id}
    pair_list: tuple[tuple[int, int], ...]
    label_sets: tuple[frozenset[int], ...]
    original: dict  # copy id -> original vertex


def clamp_capacities(inst: Instance) -> Instance:
    """Capacities above K never bind; cap them at K so they can serve as labels."""
    K = inst.K
    if inst.c_max <= K:
        return inst
    return inst.with_capacities(lambda e: min(e.capacity, K))


def build_labvdp_from_skeleton(inst: Instance, sk: PotentialSkeleton, labelled: bool = True, label_sets=None):
    """The copy graph of ``inst`` for skeleton ``sk`` and its pairs.

    With ``labelled=False`` every pair may use any arc (uniform capacities);
    ``label_sets`` (one per skeleton arc) overrides the default sets.
    """
    K = inst.K
    nbrs: dict[int, list[int]] = {v: [] for v in sk.vertices}
    for u, v in sk.arcs:
        nbrs[u].append(v)
        nbrs[v].append(u)
    copies: dict[int, list[int]] = {}
    copy_map: dict[int, dict[int, int]] = {}
    original: dict[int, int] = {}
    nid = 0
    for x in inst.vertices:
        if x in nbrs:
            copy_map[x] = {}
            copies[x] = []
            for y in nbrs[x]:
                nid += 1
                copy_map[x][y] = nid
                copies[x].append(nid)
                original[nid] = x
        else:
            nid += 1
            copies[x] = [nid]
            original[nid] = x
    edges = []
    for e in inst.edges:
        label = min(e.capacity, K)
        for a in copies[e.u]:
            for b in copies[e.v]:
                edges.append((a, b, e.length, label))
    pairs = tuple((copy_map[u][v], copy_map[v][u]) for u, v in sk.arcs)
    full = frozenset(range(1, K + 1))
    if label_sets is not None:
        sets = tuple(frozenset(x) for x in label_sets)
    else:
        sets = tuple(frozenset(range(sk.below[v], K + 1)) if labelled else full for _, v in sk.arcs)
    lab = LabVdpInstance.build(inst.kind, nid, edges, pairs, sets, k=K)
    return lab, SkeletonExpansion(sk, copy_map, pairs, sets, original)


def _prepare(inst: Instance, bound: int) -> Instance:
    if inst.K > bound:
        raise PreconditionError(f"K={inst.K} exceeds the fixed-K bound {bound}")
    return normalize_terminals(clamp_capacities(inst))


def _distance_tables(inst: Instance, sources, levels):
    # per capacity level, shortest distances from each possible skeleton vertex
    tables = {}
    for k in levels:
        adj = adjacency(inst, keep=lambda a, k=k: a.capacity >= k)
        tables[k] = {s: dijkstra(adj, [s])[0] for s in sources}
    return tables


def _lower_bound(sk: PotentialSkeleton, tables, labelled: bool):
    total = 0
    for u, v in sk.arcs:
        d = tables[sk.below[v] if labelled else 1][u].get(v)
        if d is None:
            return None
        total += d
    return total


def expand_skeleton(inst: Instance, sk: PotentialSkeleton, label_sets=None, labelled=True, decision=False):
    """Arcs of the cheapest disjoint-path expansion of ``sk``, or None."""
    lab, exp = build_labvdp_from_skeleton(inst, sk, labelled, label_sets)
    if inst.kind == "dag":
        rep = labvdp_dag_dp(lab)
    else:
        rep = vdisj_search(lab, use_lengths=not decision)
    if rep is None:
        return None
    arcs = []
    for path in rep.paths:
        orig = [exp.original[x] for x in path]
        arcs += list(zip(orig, orig[1:]))
    return arcs


def _solve_expansion(inst: Instance, labelled: bool, decision: bool, sk: PotentialSkeleton):
    arcs = expand_skeleton(inst, sk, labelled=labelled, decision=decision)
    if arcs is None:
        return None
    sol = make_solution(inst, arcs)
    report = check_feasible_tree(inst, sol)
    assert report.ok, report
    return sol.total_length, sol


def _search(norm: Instance, skeletons, labelled: bool, decision: bool, workers: int | None):
    sources = sorted({norm.root} | {v for sk in skeletons for v in sk.junctions})
    levels = range(1, norm.K + 1) if labelled else [1]
    tables = _distance_tables(norm, sources, levels)
    ranked = []
    for i, sk in enumerate(skeletons):
        lb = _lower_bound(sk, tables, labelled)
        if lb is not None:
            ranked.append((lb, i, sk))
    ranked.sort(key=lambda x: (x[0], x[1]))
    evaluate = partial(_solve_expansion, norm, labelled, decision)
    workers = worker_count() if workers is None else workers
    if workers > 1 and not decision:
        found = best_of(evaluate, [sk for _, _, sk in ranked], workers)
        return None if found is None else found[1][1]
    best = None
    for lb, _, sk in ranked:
        if best is not None and lb >= best.total_length:
            break
        res = evaluate(sk)
        if res is None:
            continue
        if decision:
            return res[1]
        if best is None or res[0] < best.total_length:
            best = res[1]
    return best


def solve_dag_fixed_k(
    inst: Instance,
    *,
    mode: str = "optimize",
    bound: int = FIXED_K_BOUND,
    workers: int | None = None,
) -> SteinerSolution | None:
    """Exact optimum on a DAG with few terminals and arbitrary capacities."""
    if inst.kind != "dag":
        raise NotADag("solve_dag_fixed_k needs a DAG instance")
    norm = _prepare(inst, bound)
    skeletons = list(enumerate_potential_skeletons(norm, arc_ok=reachability(norm)))
    sol = _search(norm, skeletons, labelled=True, decision=mode == "decision", workers=workers)
    return restore_solution(inst, norm, sol)


def root_subtrees_fit(sk: PotentialSkeleton, c: int) -> bool:
    return all(sk.below[v] <= c for u, v in sk.arcs if u == sk.root)


def solve_uniform_fixed_k(
    inst: Instance,
    *,
    mode: str = "optimize",
    bound: int = FIXED_K_BOUND,
    workers: int | None = None,
) -> SteinerSolution | None:
    """Exact optimum for uniform capacity c and few terminals.

    Only the arcs leaving the root can be overloaded, so skeletons with a root
    subtree of more than ``c`` terminals are dropped and the remaining ones
    need plain (unlabelled) disjoint paths.
    """
    caps = {e.capacity for e in inst.edges}
    if len(caps) != 1:
        raise PreconditionError("solve_uniform_fixed_k needs uniform capacities")
    (c,) = caps
    norm = _prepare(inst, bound)
    # pendant edges added by normalization carry exactly one terminal, so they never bind
    skeletons = [sk for sk in enumerate_potential_skeletons(norm, arc_ok=reachability(norm)) if root_subtrees_fit(sk, c)]
    sol = _search(norm, skeletons, labelled=False, decision=mode == "decision", workers=workers)
    return restore_solution(inst, norm, sol)


def expansion_value(inst: Instance, sk: PotentialSkeleton, labelled: bool = True) -> Fraction | None:
    """Cheapest stitched tree for one skeleton, or None (exposed for tests)."""
    res = _solve_expansion(inst, labelled, False, sk)
    return None if res is None else res[0]
