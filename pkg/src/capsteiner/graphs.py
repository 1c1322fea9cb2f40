"""Small graph routines shared by the solvers.

Adjacency is ``dict[vertex, list[(head, length)]]``; vertices are ints.  All
routines break ties by vertex id so results are reproducible.
"""

from __future__ import annotations

import heapq
from collections import defaultdict, deque
from typing import Callable, Iterable

from capsteiner.core import Arc, Instance, NotADag


def adjacency(inst: Instance, keep: Callable[[Arc], bool] | None = None, banned: Iterable[int] = ()) -> dict:
    banned = set(banned)
    adj: dict[int, list[tuple[int, object]]] = {v: [] for v in inst.vertices if v not in banned}
    for a in inst.arcs:
        if a.u in banned or a.v in banned:
            continue
        if keep is None or keep(a):
            adj[a.u].append((a.v, a.length))
    return adj


def dijkstra(adj: dict, sources, target=None):
    """Shortest distances from ``sources`` (iterable of vertices or dict of offsets).

    Returns ``(dist, pred)`` where ``pred[v]`` is the previous vertex on a
    shortest path.
    """
    if not isinstance(sources, dict):
        sources = {s: 0 for s in sources}
    dist = {}
    pred: dict = {}
    # (distance, vertex, has_pred, pred): sources sort before relaxed entries
    heap = [(d, s, 0, 0) for s, d in sources.items()]
    heapq.heapify(heap)
    while heap:
        d, u, has_pred, p = heapq.heappop(heap)
        if u in dist:
            continue
        dist[u] = d
        if has_pred:
            pred[u] = p
        if u == target:
            break
        for v, length in adj.get(u, ()):
            if v not in dist:
                heapq.heappush(heap, (d + length, v, 1, u))
    return dist, pred


def path_to(pred: dict, v) -> list:
    path = [v]
    while v in pred:
        v = pred[v]
        path.append(v)
    path.reverse()
    return path


def reachable(adj: dict, start) -> set:
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v, _ in adj.get(u, ()):
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def bfs_path(adj: dict, sources: Iterable, target):
    """Fewest-arc path from any source to ``target`` (sources tried in id order)."""
    sources = sorted(sources)
    pred = {}
    seen = set(sources)
    queue = deque(sources)
    while queue:
        u = queue.popleft()
        if u == target:
            return path_to(pred, u)
        for v, _ in sorted(adj.get(u, ()), key=lambda x: x[0]):
            if v not in seen:
                seen.add(v)
                pred[v] = u
                queue.append(v)
    return None


def topological_order(vertices: Iterable[int], arcs: Iterable[tuple[int, int]], reverse_ties: bool = False) -> list[int]:
    """Kahn's algorithm taking the smallest (or largest) available id first."""
    vertices = list(vertices)
    indeg = {v: 0 for v in vertices}
    out = defaultdict(list)
    for u, v in arcs:
        out[u].append(v)
        indeg[v] += 1
    sign = -1 if reverse_ties else 1
    heap = [sign * v for v, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        u = sign * heapq.heappop(heap)
        order.append(u)
        for v in out[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(heap, sign * v)
    if len(order) != len(vertices):
        raise NotADag("graph contains a directed cycle")
    return order


def prune_tree(arcs: Iterable[tuple[int, int]], terminals: Iterable[int]) -> list[tuple[int, int]]:
    """Remove arcs leading to non-terminal leaves until none remain."""
    arcs = list(dict.fromkeys(arcs))
    terminals = set(terminals)
    outdeg: dict[int, int] = defaultdict(int)
    into: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for u, v in arcs:
        outdeg[u] += 1
        into[v].append((u, v))
    dead = set()
    queue = deque(v for _, v in arcs if outdeg[v] == 0 and v not in terminals)
    while queue:
        v = queue.popleft()
        for a in into[v]:
            if a in dead:
                continue
            dead.add(a)
            u = a[0]
            outdeg[u] -= 1
            if outdeg[u] == 0 and u not in terminals:
                queue.append(u)
    return [a for a in arcs if a not in dead]


def tree_from_union(inst: Instance, arcs: Iterable[tuple[int, int]], root: int | None = None, terminals=None):
    """Shortest-path arborescence of ``root`` inside an arc set, pruned to the terminals.

    The result is a subset of ``arcs`` so its length never exceeds theirs.
    Returns ``None`` when some terminal is not reachable inside the set.
    """
    root = inst.root if root is None else root
    terminals = inst.terminals if terminals is None else terminals
    amap = inst.arc_map
    adj: dict = defaultdict(list)
    for u, v in dict.fromkeys(arcs):
        adj[u].append((v, amap[(u, v)].length))
    for u in adj:
        adj[u].sort(key=lambda x: x[0])
    dist, pred = dijkstra(adj, [root])
    if any(t not in dist for t in terminals):
        return None
    tree = [(pred[v], v) for v in sorted(pred)]
    return prune_tree(tree, terminals)
