"""Solvers for capacities close to K.

With every capacity at least ``K - kappa``, feasibility is decided by small
"reduced trees": rooted trees whose terminals leave enough slack that any
completion to all terminals stays within capacity.  With ``c_min = K - 1``
an optimal tree is a shortest high-capacity path to a branch vertex ``w``
followed by two disjoint branches and a Steiner tree hung from them.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction

from capsteiner.core import (
    Infeasible,
    Instance,
    NotADag,
    PreconditionError,
    SteinerSolution,
    check_feasible_tree,
    compute_loads,
    make_solution,
    normalize_lengths,
    normalize_terminals,
    restore_solution,
    skeleton_of_arcs,
)
from capsteiner.fixed_k import FIXED_K_BOUND, clamp_capacities, expand_skeleton, solve_dag_fixed_k
from capsteiner.flow import min_length_disjoint_bundle
from capsteiner.graphs import adjacency, bfs_path, dijkstra, path_to, prune_tree
from capsteiner.skeletons import PotentialSkeleton, enumerate_potential_skeletons, reachability
from capsteiner.steiner import ApproxReport, dreyfus_wagner, steiner_approx


@dataclass(frozen=True)
class ReducedTreeParams:
    kappa: int
    c_min: int
    c_max: int
    E_K: frozenset[int]  # indices of edges with capacity >= K
    Lambda: int

    @classmethod
    def of(cls, inst: Instance, kappa: int) -> ReducedTreeParams:
        K = inst.K
        ek = frozenset(i for i, e in enumerate(inst.edges) if e.capacity >= K)
        return cls(kappa, inst.c_min, inst.c_max, ek, (kappa + 1) ** (kappa + 1))


def _arcs_of(tree) -> list[tuple[int, int]]:
    return list(tree.arcs) if isinstance(tree, SteinerSolution) else list(tree)


def _rooted_tree(inst: Instance, arcs) -> bool:
    parent = {}
    amap = inst.arc_map
    for u, v in arcs:
        if (u, v) not in amap or v in parent or v == inst.root:
            return False
        parent[v] = u
    for v in parent:
        seen = set()
        x = v
        while x != inst.root:
            if x in seen or x not in parent:
                return False
            seen.add(x)
            x = parent[x]
    return True


def is_reduced_tree_uniform(inst: Instance, tree, kappa: int) -> bool:
    """Rooted tree in which every root arc leaves at least ``kappa`` of its terminals off its side.

    The empty tree only qualifies when ``kappa == 0``: a completion needs
    ``kappa`` spanned terminals to keep every new arc within capacity.
    """
    arcs = _arcs_of(tree)
    if not _rooted_tree(inst, arcs):
        return False
    spanned = {v for _, v in arcs} & inst.terminal_set
    if len(spanned) < kappa:
        return False
    loads = compute_loads(arcs, spanned)
    return all(len(spanned) - loads[(u, v)] >= kappa for u, v in arcs if u == inst.root)


def is_reduced_tree_dag(inst: Instance, tree, kappa: int) -> bool:
    """Tree spanning at least ``kappa`` terminals where each arc ``a`` leaves ``K - c(a)`` of them off its side."""
    arcs = _arcs_of(tree)
    if not _rooted_tree(inst, arcs):
        return False
    spanned = {v for _, v in arcs} & inst.terminal_set
    if len(spanned) < kappa:
        return False
    loads = compute_loads(arcs, spanned)
    amap = inst.arc_map
    return all(len(spanned) - loads[a] >= inst.K - amap[a].capacity for a in arcs)


def complete_reduced_tree(inst: Instance, reduced) -> SteinerSolution:
    """Graft a fewest-arc path to every unspanned terminal from the current tree."""
    arcs = _arcs_of(reduced)
    in_tree = {inst.root} | {v for _, v in arcs}
    adj = adjacency(inst)
    for t in inst.terminals:
        if t in in_tree:
            continue
        path = bfs_path(adj, in_tree, t)
        if path is None:
            raise Infeasible(f"terminal {t} is unreachable from the tree")
        arcs += list(zip(path, path[1:]))
        in_tree.update(path)
    return make_solution(inst, prune_tree(arcs, inst.terminals))


def merge_trees(inst: Instance, first, second) -> list[tuple[int, int]]:
    """Union of two rooted trees, dropping arcs of ``second`` that enter a vertex of ``first``."""
    first = _arcs_of(first)
    heads = {v for _, v in first}
    kept = [(u, v) for u, v in _arcs_of(second) if v not in heads]
    return prune_tree(first + kept, inst.terminals)


def _uniform_capacity(inst: Instance) -> int:
    caps = {e.capacity for e in inst.edges}
    if len(caps) != 1:
        raise PreconditionError("nonuniform capacities")
    return caps.pop()


def _subsets(terms, lo, hi):
    for size in range(lo, hi + 1):
        yield from itertools.combinations(terms, size)


def _height(sk: PotentialSkeleton) -> int:
    ch = sk.children()

    def h(v):
        return 1 + max((h(c) for c in ch[v]), default=-1)

    return h(sk.root)


def uniform_candidates(norm: Instance, kappa: int):
    """Skeletons of minimal reduced trees under uniform capacity: root subtrees within kappa, the rest off."""
    K = norm.K
    if kappa == 0:
        return
    ok = reachability(norm)
    for sub in _subsets(norm.terminals, kappa + 1, min(2 * kappa, K)):
        for sk in enumerate_potential_skeletons(norm, sub, arc_ok=ok):
            size = len(sub)
            root_kids = [v for u, v in sk.arcs if u == sk.root]
            if all(sk.below[v] <= kappa and size - sk.below[v] >= kappa for v in root_kids):
                yield sk, None


def dag_candidates(norm: Instance, kappa: int):
    """Skeletons of minimal reduced trees in a DAG, with the capacity floor for each arc."""
    K = norm.K
    lam = (kappa + 1) ** (kappa + 1)
    if kappa == 0:
        return
    ok = reachability(norm)
    for sub in _subsets(norm.terminals, kappa, min(lam, K)):
        size = len(sub)
        for sk in enumerate_potential_skeletons(norm, sub, max_out=kappa + 1, max_height=kappa + 1, arc_ok=ok):
            sets = []
            for _, v in sk.arcs:
                floor = max(1, K - (size - sk.below[v]))
                sets.append(frozenset(range(floor, K + 1)))
            yield sk, tuple(sets)


def _ranked(norm: Instance, candidates):
    # order candidates by an admissible bound and drop those with an unreachable arc
    levels: dict[int, dict] = {}

    def dist(level, u, v):
        if level not in levels:
            levels[level] = {}
        table = levels[level]
        if u not in table:
            adj = adjacency(norm, keep=lambda a: a.capacity >= level)
            table[u] = dijkstra(adj, [u])[0]
        return table[u].get(v)

    ranked = []
    for i, (sk, sets) in enumerate(candidates):
        lb = 0
        for j, (u, v) in enumerate(sk.arcs):
            d = dist(min(sets[j]) if sets is not None else 1, u, v)
            if d is None:
                lb = None
                break
            lb += d
        if lb is not None:
            ranked.append((lb, i, sk, sets))
    ranked.sort(key=lambda x: (x[0], x[1]))
    return ranked


def _reduced_search(norm: Instance, candidates, decision: bool, check):
    ranked = _ranked(norm, candidates)
    best = None
    for lb, _, sk, sets in ranked:
        if best is not None and lb >= best[1]:
            break
        arcs = expand_skeleton(norm, sk, label_sets=sets, labelled=sets is not None, decision=decision)
        if arcs is None:
            continue
        assert check(arcs), (sk, arcs)
        if decision:
            return arcs, 0
        length = sum(norm.arc_map[a].length for a in arcs)
        if best is None or length < best[1]:
            best = (arcs, length)
    return best


def _finish(inst: Instance, norm: Instance, reduced_arcs, decision: bool, exact_bound: int):
    """Complete (decision) or merge with an approximate Steiner tree (optimize)."""
    if decision:
        sol = complete_reduced_tree(norm, reduced_arcs)
        assert check_feasible_tree(norm, sol).ok
        return restore_solution(inst, norm, sol)
    spanned = {v for _, v in reduced_arcs}
    rest = [t for t in norm.terminals if t not in spanned]
    if rest:
        second = steiner_approx(norm, norm.root, rest, exact_bound=exact_bound)
        arcs = merge_trees(norm, reduced_arcs, second.solution)
        rho = second.guarantee
    else:
        arcs, rho = prune_tree(reduced_arcs, norm.terminals), Fraction(0)
    sol = make_solution(norm, arcs)
    report = check_feasible_tree(norm, sol)
    assert report.ok, report
    guarantee = None if rho is None else 1 + rho
    return ApproxReport(restore_solution(inst, norm, sol), guarantee)


def _steiner_only(inst: Instance, decision: bool, exact_bound: int):
    # capacities never bind: any Steiner tree is feasible
    if decision:
        return complete_reduced_tree(inst, [])
    rep = steiner_approx(inst, exact_bound=exact_bound)
    return rep


def solve_uniform_k_minus_kappa(
    inst: Instance,
    kappa: int | None = None,
    mode: str = "optimize",
    exact_bound: int = 10,
):
    """Uniform capacity ``c = K - kappa`` on a DAG or undirected graph.

    Decision mode returns a feasible tree or None; optimize mode returns an
    ``ApproxReport`` whose guarantee is 1 + (guarantee of the Steiner step).
    """
    if inst.kind not in ("dag", "undirected"):
        raise PreconditionError("uniform kappa solver needs a DAG or an undirected graph")
    c = min(_uniform_capacity(inst), inst.K)
    kappa = inst.K - c if kappa is None else kappa
    if kappa != inst.K - c:
        raise PreconditionError(f"capacity {c} is not K - kappa for kappa={kappa}")
    decision = mode == "decision"
    if kappa == 0:
        return _steiner_only(inst, decision, exact_bound)
    norm = normalize_terminals(clamp_capacities(inst), capacity=c)
    found = _reduced_search(norm, uniform_candidates(norm, kappa), decision,
                            lambda arcs: is_reduced_tree_uniform(norm, arcs, kappa))
    if found is None:
        return None
    return _finish(inst, norm, found[0], decision, exact_bound)


def solve_dag_large_cap(
    inst: Instance,
    kappa: int | None = None,
    mode: str = "optimize",
    exact_bound: int = 10,
):
    """DAG with every capacity at least ``K - kappa``; same contract as the uniform solver."""
    if inst.kind != "dag":
        raise NotADag("solve_dag_large_cap needs a DAG instance")
    K = inst.K
    kappa = max(0, K - min(inst.c_min, K)) if kappa is None else kappa
    if inst.c_min < K - kappa:
        raise PreconditionError(f"minimum capacity {inst.c_min} is below K - kappa = {K - kappa}")
    decision = mode == "decision"
    if K < kappa:
        sol = solve_dag_fixed_k(inst, mode=mode, bound=max(FIXED_K_BOUND, K))
        if sol is None or decision:
            return sol
        return ApproxReport(sol, Fraction(1))
    if kappa == 0:
        return _steiner_only(inst, decision, exact_bound)
    norm = normalize_terminals(clamp_capacities(inst), capacity=min(inst.c_min, K))
    found = _reduced_search(norm, dag_candidates(norm, kappa), decision,
                            lambda arcs: is_reduced_tree_dag(norm, arcs, kappa))
    if found is None:
        return None
    return _finish(inst, norm, found[0], decision, exact_bound)


# --- c_min = K - 1 -----------------------------------------------------------


def first_branch_vertex(inst: Instance, sol) -> tuple[int, list[int]]:
    """The vertex of out-degree >= 2 closest to the root, and the root path to it.

    Terminals must be leaves of ``sol`` (see ``normalize_terminals``).
    """
    ch = defaultdict(list)
    for u, v in _arcs_of(sol):
        ch[u].append(v)
    if any(ch[t] for t in inst.terminals):
        raise PreconditionError("terminals must be leaves of the tree")
    path = [inst.root]
    x = inst.root
    while len(ch[x]) == 1:
        x = ch[x][0]
        path.append(x)
    return x, path


def _subtree_vertices(arcs, w) -> set[int]:
    ch = defaultdict(list)
    for u, v in arcs:
        ch[u].append(v)
    seen = {w}
    stack = [w]
    while stack:
        u = stack.pop()
        for v in ch[u]:
            seen.add(v)
            stack.append(v)
    return seen


def check_shortpath_property(inst: Instance, sol) -> bool:
    """The root path of ``sol`` to its first branch vertex ``w`` is a shortest path over
    capacity-K arcs, and no shortest such path touches the subtree of ``w`` except at ``w``."""
    arcs = _arcs_of(sol)
    w, prefix = first_branch_vertex(inst, arcs)
    if w == inst.root:
        return True
    K = inst.K
    adj = adjacency(inst, keep=lambda a: a.capacity >= K)
    dist, _ = dijkstra(adj, [inst.root])
    if w not in dist:
        return False
    amap = inst.arc_map
    if sum(amap[(a, b)].length for a, b in zip(prefix, prefix[1:])) != dist[w]:
        return False
    radj = defaultdict(list)
    for u, lst in adj.items():
        for v, l in lst:
            radj[v].append((u, l))
    back, _ = dijkstra(radj, [w])
    for x in _subtree_vertices(arcs, w) - {w}:
        if x in dist and x in back and dist[x] + back[x] == dist[w]:
            return False
    return True


def w_bound(K: int) -> int:
    """Most forced branch vertices a witnessing bundle can need: ceil(2 log2 K - 2)."""
    return max(0, math.ceil(2 * math.log2(K) - 2 - 1e-12))


def witness_quadruple(inst: Instance, sol) -> tuple[int, int, int, frozenset[int]]:
    """The (w, t_i, t_j, W) that an optimal tree exhibits, taking terminals nearest in the skeleton."""
    arcs = _arcs_of(sol)
    w, _ = first_branch_vertex(inst, arcs)
    sk = skeleton_of_arcs(inst.root, arcs, inst.terminals)
    sk_ch = defaultdict(list)
    for u, v in sk.arcs:
        sk_ch[u].append(v)
    v1, v2 = sk_ch[w][:2]

    def nearest(v):
        frontier = [v]
        while frontier:
            for x in frontier:
                if x in inst.terminal_set:
                    return x
            frontier = [c for x in frontier for c in sorted(sk_ch[x])]
        raise AssertionError("skeleton leaf is not a terminal")

    ti, tj = nearest(v1), nearest(v2)
    parent = {v: u for u, v in arcs}
    deg = defaultdict(int)
    for u, v in arcs:
        deg[u] += 1
        deg[v] += 1
    W = set()
    for t in (ti, tj):
        x = t
        while x != w:
            if deg[x] >= 3:
                W.add(x)
            x = parent[x]
    return w, ti, tj, frozenset(W)


def _branch_vertices(inst: Instance) -> list[int]:
    return [inst.root] + [v for v in inst.vertices if v != inst.root and inst.degree[v] >= 3]


def _high_path(inst: Instance, w: int):
    K = inst.K
    adj = adjacency(inst, keep=lambda a: a.capacity >= K)
    for u in adj:
        adj[u].sort(key=lambda x: x[0])
    dist, pred = dijkstra(adj, [inst.root], target=w)
    if w not in dist:
        return None
    return path_to(pred, w), dist[w]


def _sub_instance(inst: Instance, banned: set[int], root: int, terminals, zero=frozenset()) -> Instance:
    # same vertex ids; edges touching banned vertices dropped, chosen edges set to length 0
    edges = []
    for i, e in enumerate(inst.edges):
        if e.u in banned or e.v in banned:
            continue
        edges.append((e.u, e.v, 0 if i in zero else e.length, e.capacity))
    return Instance.build(inst.kind, inst.n, edges, root, terminals)


def _assemble(inst: Instance, mu, bundle, tree_arcs, off: set[int]):
    arcs = list(zip(mu, mu[1:]))
    for p in bundle:
        arcs += list(zip(p, p[1:]))
    arcs += [(u, v) for u, v in tree_arcs if v not in off]
    return prune_tree(arcs, inst.terminals)


def _triples(norm: Instance):
    for w in _branch_vertices(norm):
        hp = _high_path(norm, w)
        if hp is None:
            continue
        mu, mu_len = hp
        banned = set(mu) - {w}
        for ti, tj in itertools.combinations(norm.terminals, 2):
            if ti in banned or tj in banned or w in (ti, tj):
                continue
            yield w, mu, mu_len, banned, ti, tj


def _arc_list(inst: Instance, banned):
    return [(a.u, a.v, a.length) for a in inst.arcs if a.u not in banned and a.v not in banned]


def _edge_ids(inst: Instance, paths) -> frozenset[int]:
    amap = inst.arc_map
    return frozenset(amap[(a, b)].edge for p in paths for a, b in zip(p, p[1:]))


@dataclass(frozen=True)
class QuadrupleResult:
    solution: SteinerSolution
    quadruple: tuple[int, int, int, frozenset[int]]


def _prepare_k1(inst: Instance) -> Instance:
    if inst.c_min < inst.K - 1:
        raise PreconditionError(f"minimum capacity {inst.c_min} is below K - 1")
    scaled, _ = normalize_lengths(inst)
    return normalize_terminals(scaled, capacity=inst.c_min)


def solve_cmin_k_minus_1_fixed_k(inst: Instance, bound: int = FIXED_K_BOUND, with_witness: bool = False):
    """Exact optimum for ``c_min >= K - 1`` and few terminals.

    Lengths are first made positive integers (this keeps the optimum and is
    what makes the shortest high-capacity root path safe to fix).  Returns the
    tree, or ``QuadrupleResult`` with the winning quadruple if requested.
    """
    K = inst.K
    if K > bound:
        raise PreconditionError(f"K={K} exceeds the fixed-K bound {bound}")
    if inst.c_min >= K:
        sol = dreyfus_wagner(inst)
        return QuadrupleResult(sol, None) if with_witness else sol
    norm = _prepare_k1(inst)
    limit = w_bound(K)
    best = None
    for w, mu, mu_len, banned, ti, tj in _triples(norm):
        arcs = _arc_list(norm, banned)
        sub = _sub_instance(norm, banned, w, [])
        cands = [v for v in sub.vertices if v not in banned and v not in (w, ti, tj) and sub.degree[v] >= 3]
        rest = [t for t in norm.terminals if t not in (ti, tj)]
        for size in range(limit + 1):
            for W in itertools.combinations(cands, size):
                found = min_length_disjoint_bundle(arcs, [v for v in norm.vertices if v not in banned], w, (ti, tj), W)
                if found is None:
                    continue
                bundle, blen = found
                if best is not None and mu_len + blen >= best[0]:
                    continue
                on_bundle = {x for p in bundle for x in p}
                zeroed = _sub_instance(norm, banned, w, rest, _edge_ids(norm, bundle))
                try:
                    st = dreyfus_wagner(zeroed, w, rest, bound=bound) if rest else None
                except Infeasible:
                    continue
                tree = _assemble(norm, mu, bundle, st.arcs if st else [], on_bundle)
                sol = make_solution(norm, tree)
                report = check_feasible_tree(norm, sol)
                assert report.ok, report
                if best is None or sol.total_length < best[0]:
                    best = (sol.total_length, sol, (w, ti, tj, frozenset(W)))
    if best is None:
        return None
    sol = restore_solution(inst, norm, best[1])
    return QuadrupleResult(sol, best[2]) if with_witness else sol


def solve_cmin_k_minus_1(inst: Instance, mode: str = "optimize", exact_bound: int = 10):
    """``c_min >= K - 1`` with any K: decision returns a tree or None, optimize an ``ApproxReport``."""
    K = inst.K
    decision = mode == "decision"
    if inst.c_min < K - 1:
        raise PreconditionError(f"minimum capacity {inst.c_min} is below K - 1")
    if inst.c_min >= K:
        return _steiner_only(inst, decision, exact_bound)
    work = normalize_terminals(inst, capacity=inst.c_min)
    # the Steiner step always spans K - 2 terminals, so its guarantee is the same for every triple
    if K - 2 <= exact_bound:
        rho = Fraction(1)
    else:
        rho = Fraction(2) if inst.kind == "undirected" else None
    best = None
    for w, mu, mu_len, banned, ti, tj in _triples(work):
        arcs = _arc_list(work, banned)
        found = min_length_disjoint_bundle(arcs, [v for v in work.vertices if v not in banned], w, (ti, tj))
        if found is None:
            continue
        bundle, blen = found
        if decision:
            base = list(zip(mu, mu[1:])) + [a for p in bundle for a in zip(p, p[1:])]
            sol = complete_reduced_tree(work, base)
            assert check_feasible_tree(work, sol).ok
            return restore_solution(inst, work, sol)
        if best is not None and mu_len + blen >= best.total_length:
            continue
        rest = [t for t in work.terminals if t not in (ti, tj)]
        on = set(mu) | {x for p in bundle for x in p}
        tree_arcs = steiner_approx(work, work.root, rest, exact_bound=exact_bound).solution.arcs if rest else []
        sol = make_solution(work, _assemble(work, mu, bundle, tree_arcs, on))
        report = check_feasible_tree(work, sol)
        assert report.ok, report
        if best is None or sol.total_length < best.total_length:
            best = sol
    if best is None:
        return None
    return ApproxReport(restore_solution(inst, work, best), None if rho is None else 1 + rho)
