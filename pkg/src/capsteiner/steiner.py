"""Uncapacitated rooted Steiner trees: exact Dreyfus-Wagner and cheap approximations.

Capacities of the input instance are ignored here.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from capsteiner.core import Infeasible, Instance, PreconditionError, SteinerSolution, make_solution
from capsteiner.graphs import adjacency, dijkstra, path_to, tree_from_union

EXACT_BOUND = 10


@dataclass(frozen=True)
class ApproxReport:
    solution: SteinerSolution
    guarantee: Fraction | None
    achieved_ratio: Fraction | None = None


def _reverse(adj):
    radj = {v: [] for v in adj}
    for u, lst in adj.items():
        for v, l in lst:
            radj.setdefault(v, []).append((u, l))
    return radj


def dreyfus_wagner(inst: Instance, root: int | None = None, terminals=None, bound: int = EXACT_BOUND) -> SteinerSolution:
    """Exact minimum-length Steiner arborescence by DP over (terminal subset, vertex)."""
    root = inst.root if root is None else root
    terminals = list(inst.terminals if terminals is None else terminals)
    terminals = [t for t in dict.fromkeys(terminals) if t != root]
    if len(terminals) > bound:
        raise PreconditionError(f"{len(terminals)} terminals exceeds the exact bound {bound}")
    if not terminals:
        return make_solution(inst, [])
    adj = adjacency(inst)
    radj = _reverse(adj)
    k = len(terminals)
    full = (1 << k) - 1
    # dp[mask][v]: cheapest arborescence from v spanning the terminals in mask
    dp: list[dict] = [dict() for _ in range(full + 1)]
    how: list[dict] = [dict() for _ in range(full + 1)]
    for i, t in enumerate(terminals):
        dist, pred = dijkstra(radj, [t])
        mask = 1 << i
        dp[mask] = dist
        how[mask] = {v: ("step", pred[v]) for v in pred}
    for mask in range(1, full + 1):
        if mask & (mask - 1) == 0:
            continue
        merged = {}
        choice = {}
        sub = (mask - 1) & mask
        while sub:
            other = mask ^ sub
            if sub < other:
                a, b = dp[sub], dp[other]
                for v, x in a.items():
                    y = b.get(v)
                    if y is not None and (v not in merged or x + y < merged[v]):
                        merged[v] = x + y
                        choice[v] = ("split", sub)
            sub = (sub - 1) & mask
        dist, pred = dijkstra(radj, merged)
        dp[mask] = dist
        how[mask] = {v: ("step", pred[v]) if v in pred else choice[v] for v in dist}
    if root not in dp[full]:
        raise Infeasible("some terminal is unreachable from the root")
    arcs = []
    stack = [(full, root)]
    while stack:
        mask, v = stack.pop()
        step = how[mask].get(v)
        if step is None:
            continue
        if step[0] == "step":
            arcs.append((v, step[1]))
            stack.append((mask, step[1]))
        else:
            stack.append((step[1], v))
            stack.append((mask ^ step[1], v))
    tree = tree_from_union(inst, arcs, root, terminals)
    sol = make_solution(inst, tree)
    assert sol.total_length == dp[full][root], (sol.total_length, dp[full][root])
    return sol


def _kmb(inst: Instance, root: int, terminals: list[int]) -> SteinerSolution:
    # metric-closure minimum spanning tree over root and terminals, expanded to paths
    adj = adjacency(inst)
    keys = [root, *terminals]
    trees = {x: dijkstra(adj, [x]) for x in keys}
    in_tree = {root}
    best = {x: (trees[root][0].get(x), root) for x in terminals}
    arcs = []
    while len(in_tree) < len(keys):
        cand = [(d, x, src) for x, (d, src) in best.items() if x not in in_tree and d is not None]
        if not cand:
            raise Infeasible("some terminal is unreachable from the root")
        _, x, src = min(cand)
        p = path_to(trees[src][1], x)
        arcs += list(zip(p, p[1:]))
        in_tree.add(x)
        dist = trees[x][0]
        for y in terminals:
            if y not in in_tree and y in dist and (best[y][0] is None or dist[y] < best[y][0]):
                best[y] = (dist[y], x)
    both = arcs + [(v, u) for u, v in arcs]
    tree = tree_from_union(inst, both, root, terminals)
    return make_solution(inst, tree)


def _greedy_directed(inst: Instance, root: int, terminals: list[int]) -> SteinerSolution:
    adj = adjacency(inst)
    tree_vertices = {root}
    arcs: list[tuple[int, int]] = []
    left = set(terminals)
    while left:
        dist, pred = dijkstra(adj, {v: 0 for v in sorted(tree_vertices)})
        cand = [(dist[t], t) for t in left if t in dist]
        if not cand:
            raise Infeasible("some terminal is unreachable from the root")
        _, t = min(cand)
        p = path_to(pred, t)
        arcs += list(zip(p, p[1:]))
        tree_vertices.update(p)
        left -= tree_vertices
    tree = tree_from_union(inst, arcs, root, terminals)
    return make_solution(inst, tree)


def steiner_approx(
    inst: Instance,
    root: int | None = None,
    terminals=None,
    exact_bound: int = EXACT_BOUND,
    force_heuristic: bool = False,
) -> ApproxReport:
    """Steiner tree with a reported guarantee.

    Exact (guarantee 1) when the terminal count is within ``exact_bound``;
    otherwise the shortest-path MST heuristic (guarantee 2) on undirected
    graphs and a greedy nearest-terminal merge (no guarantee) on digraphs.
    """
    root = inst.root if root is None else root
    terminals = [t for t in dict.fromkeys(inst.terminals if terminals is None else terminals) if t != root]
    if not force_heuristic and len(terminals) <= exact_bound:
        return ApproxReport(dreyfus_wagner(inst, root, terminals, exact_bound), Fraction(1))
    if inst.kind == "undirected":
        return ApproxReport(_kmb(inst, root, terminals), Fraction(2))
    return ApproxReport(_greedy_directed(inst, root, terminals), None)
