"""Exhaustive solvers for small instances.

These are deliberately simple and share no search code with the real
solvers; every acceptance test measures the solvers against them.
"""

from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass
from fractions import Fraction

import networkx as nx

from capsteiner.core import (
    Arc,
    Infeasible,
    Instance,
    LimitExceeded,
    SteinerSolution,
    check_feasible_tree,
    make_solution,
)
from capsteiner.graphs import prune_tree

INF = float("inf")


@dataclass(frozen=True)
class OracleLimits:
    max_vertices: int = 12
    max_edges: int = 24
    time_budget: float | None = None

    def check(self, n: int, m: int) -> None:
        if n > self.max_vertices:
            raise LimitExceeded(f"{n} vertices exceeds the oracle limit of {self.max_vertices}")
        if m > self.max_edges:
            raise LimitExceeded(f"{m} edges exceeds the oracle limit of {self.max_edges}")


DEFAULT_LIMITS = OracleLimits()


class _Clock:
    def __init__(self, budget):
        self.deadline = None if budget is None else time.monotonic() + budget
        self.ticks = 0

    def tick(self):
        self.ticks += 1
        if self.deadline is not None and self.ticks % 512 == 0 and time.monotonic() > self.deadline:
            raise LimitExceeded("oracle time budget exhausted")


def oracle_mlcst(inst: Instance, lim: OracleLimits = DEFAULT_LIMITS) -> SteinerSolution | None:
    """Minimum-length capacitated Steiner tree by branch and bound over rooted subtrees.

    Each rooted subtree is generated once by branching on a frontier arc
    (include it, or exclude it for the rest of the branch).  Loads only grow as
    the tree grows, so a capacity violation prunes the whole branch.
    """
    lim.check(inst.n, len(inst.edges))
    clock = _Clock(lim.time_budget)
    arcs = inst.arcs
    order = sorted(range(len(arcs)), key=lambda i: (arcs[i].length, i))
    n = inst.n
    r = inst.root
    is_term = [False] * (n + 1)
    for t in inst.terminals:
        is_term[t] = True
    K = inst.K
    out = [[] for _ in range(n + 1)]
    rev = [[] for _ in range(n + 1)]
    for i, a in enumerate(arcs):
        out[a.u].append(i)
        rev[a.v].append(i)

    in_tree = [False] * (n + 1)
    in_tree[r] = True
    parent_arc = [-1] * (n + 1)
    below = [0] * (n + 1)
    excluded = [False] * len(arcs)
    tree_order = [r]
    best: list = [None, None]  # length, arcs

    def attach_terminal(v: int) -> bool:
        ok = True
        x = v
        while x != r:
            below[x] += 1
            if below[x] > arcs[parent_arc[x]].capacity:
                ok = False
            x = arcs[parent_arc[x]].u
        return ok

    def detach_terminal(v: int) -> None:
        x = v
        while x != r:
            below[x] -= 1
            x = arcs[parent_arc[x]].u

    def record(length) -> None:
        tree = [(arcs[parent_arc[x]].u, x) for x in tree_order[1:]]
        tree = prune_tree(tree, inst.terminals)
        sol = make_solution(inst, tree)
        if best[0] is None or sol.total_length < best[0]:
            assert check_feasible_tree(inst, sol).ok
            best[0], best[1] = sol.total_length, sol

    def useful_heads(uncovered) -> list[bool]:
        # non-tree vertices from which an uncovered terminal is reachable through non-tree vertices
        good = [False] * (n + 1)
        stack = list(uncovered)
        for t in stack:
            good[t] = True
        while stack:
            v = stack.pop()
            for i in rev[v]:
                u = arcs[i].u
                if not in_tree[u] and not good[u]:
                    good[u] = True
                    stack.append(u)
        return good

    def slacks():
        slack = {r: INF}
        for x in tree_order[1:]:
            a = arcs[parent_arc[x]]
            slack[x] = min(slack[a.u], a.capacity - below[x])
        return slack

    def lower_bound(uncovered, slack):
        # multi-source Dijkstra from tree vertices that still have spare capacity above them
        dist = {}
        heap = [(0, x) for x in tree_order if slack[x] >= 1]
        heapq.heapify(heap)
        sources = set(x for _, x in heap)
        while heap:
            d, u = heapq.heappop(heap)
            if u in dist:
                continue
            dist[u] = d
            for i in out[u]:
                a = arcs[i]
                if in_tree[a.v] or a.v in dist:
                    continue
                if u in sources and excluded[i]:
                    continue
                heapq.heappush(heap, (d + a.length, a.v))
        worst = 0
        for t in uncovered:
            if t not in dist:
                return None
            worst = max(worst, dist[t])
        return worst

    def search(length, covered) -> None:
        clock.tick()
        if covered == K:
            record(length)
            return
        uncovered = [t for t in inst.terminals if not in_tree[t]]
        slack = slacks()
        lb = lower_bound(uncovered, slack)
        if lb is None:
            return
        if best[0] is not None and length + lb >= best[0]:
            return
        good = useful_heads(uncovered)
        pick = -1
        for i in order:
            a = arcs[i]
            if in_tree[a.u] and not in_tree[a.v] and not excluded[i] and good[a.v] and slack[a.u] >= 1:
                pick = i
                break
        if pick < 0:
            return
        a = arcs[pick]
        v = a.v
        in_tree[v] = True
        parent_arc[v] = pick
        tree_order.append(v)
        ok = True
        if is_term[v]:
            ok = attach_terminal(v)
        if ok:
            search(length + a.length, covered + is_term[v])
        if is_term[v]:
            detach_terminal(v)
        tree_order.pop()
        parent_arc[v] = -1
        in_tree[v] = False
        excluded[pick] = True
        search(length, covered)
        excluded[pick] = False

    search(0, 0)
    return best[1]


def _edmonds_value(nodes, arcs, root):
    """Weight of a minimum arborescence rooted at ``root`` (Chu-Liu/Edmonds), or None."""
    total = 0
    nodes = list(nodes)
    while True:
        in_w = {v: INF for v in nodes}
        pre = {}
        for u, v, w in arcs:
            if u != v and v != root and w < in_w[v]:
                in_w[v] = w
                pre[v] = u
        in_w[root] = 0
        if any(in_w[v] == INF for v in nodes):
            return None
        ident = {v: -1 for v in nodes}
        visit = {v: None for v in nodes}
        cnt = 0
        for v in nodes:
            total += in_w[v]
            x = v
            while visit[x] != v and ident[x] == -1 and x != root:
                visit[x] = v
                x = pre[x]
            if x != root and ident[x] == -1:
                y = pre[x]
                while y != x:
                    ident[y] = cnt
                    y = pre[y]
                ident[x] = cnt
                cnt += 1
        if cnt == 0:
            return total
        for v in nodes:
            if ident[v] == -1:
                ident[v] = cnt
                cnt += 1
        arcs = [(ident[u], ident[v], w - in_w[v]) for u, v, w in arcs if ident[u] != ident[v]]
        nodes = list(range(cnt))
        root = ident[root]


def oracle_steiner(inst: Instance, lim: OracleLimits = DEFAULT_LIMITS) -> SteinerSolution:
    """Uncapacitated rooted Steiner tree: best minimum arborescence over all vertex sets."""
    lim.check(inst.n, len(inst.edges))
    clock = _Clock(lim.time_budget)
    must = [inst.root, *inst.terminals]
    optional = [v for v in inst.vertices if v not in set(must)]
    best_value, best_set = None, None
    for size in range(len(optional) + 1):
        for extra in itertools.combinations(optional, size):
            clock.tick()
            chosen = set(must) | set(extra)
            sub = [(a.u, a.v, a.length) for a in inst.arcs if a.u in chosen and a.v in chosen and a.v != inst.root]
            value = _edmonds_value(sorted(chosen), sub, inst.root)
            if value is not None and (best_value is None or value < best_value):
                best_value, best_set = value, chosen
    if best_set is None:
        raise Infeasible("some terminal is unreachable from the root")
    g = nx.DiGraph()
    g.add_nodes_from(sorted(best_set))
    for a in inst.arcs:
        if a.u in best_set and a.v in best_set and a.v != inst.root:
            g.add_edge(a.u, a.v, weight=a.length)
    arb = nx.minimum_spanning_arborescence(g, attr="weight", preserve_attrs=False)
    tree = prune_tree(sorted(arb.edges()), inst.terminals)
    sol = make_solution(inst, tree)
    assert sol.total_length == best_value, (sol.total_length, best_value)
    return sol


def oracle_vdisj(vdp, lim: OracleLimits = DEFAULT_LIMITS):
    """Minimum-length mutually vertex-disjoint paths by plain path enumeration.

    ``vdp`` needs ``kind``, ``n``, ``edges`` of ``(u, v, length, ...)`` and
    ``pairs``; label restrictions (``label_sets``) are honoured when present.
    Returns ``(paths, total_length)`` or ``None``.
    """
    lim.check(vdp.n, len(vdp.edges))
    clock = _Clock(lim.time_budget)
    adj: dict[int, list[tuple[int, Fraction, int]]] = {v: [] for v in range(1, vdp.n + 1)}
    for e in vdp.edges:
        u, v, length = e[0], e[1], Fraction(e[2])
        label = e[3] if len(e) > 3 else 1
        adj[u].append((v, length, label))
        if vdp.kind == "undirected":
            adj[v].append((u, length, label))
    pairs = list(vdp.pairs)
    label_sets = getattr(vdp, "label_sets", None)
    endpoints = {x for pr in pairs for x in pr}
    best: list = [None, None]

    def paths_from(i, used):
        s, t = pairs[i]
        allowed = None if label_sets is None or label_sets[i] is None else label_sets[i]
        path = [s]
        on = {s}

        def dfs(u, length):
            clock.tick()
            if u == t:
                yield list(path), length
                return
            for v, l, lab in adj[u]:
                if v in on or v in used:
                    continue
                if v in endpoints and v != t:
                    continue
                if allowed is not None and lab not in allowed:
                    continue
                on.add(v)
                path.append(v)
                yield from dfs(v, length + l)
                path.pop()
                on.discard(v)

        yield from dfs(s, Fraction(0))

    def rec(i, used, chosen, total):
        if best[0] is not None and total >= best[0]:
            return
        if i == len(pairs):
            best[0], best[1] = total, list(chosen)
            return
        for p, l in paths_from(i, used):
            if best[0] is not None and total + l >= best[0]:
                continue
            chosen.append(p)
            rec(i + 1, used | set(p), chosen, total + l)
            chosen.pop()

    rec(0, frozenset(), [], Fraction(0))
    if best[1] is None:
        return None
    return best[1], best[0]


def oracle_paths(inst: Instance, lim: OracleLimits = DEFAULT_LIMITS, feasibility_only: bool = False) -> SteinerSolution | None:
    """Exact optimum by growing the tree one terminal path at a time.

    The uncovered terminal with the smallest backward search region goes next;
    every simple path to it from the current tree through unused vertices is tried.
    A minimal tree is generated exactly once (by its own root paths), so this
    is exhaustive.  It copes much better than ``oracle_mlcst`` with large
    sparse graphs such as the formula gadgets.  ``feasibility_only`` stops at
    the first tree found.
    """
    lim.check(inst.n, len(inst.edges))
    clock = _Clock(lim.time_budget)
    r = inst.root
    rev = {v: [] for v in inst.vertices}
    for a in inst.arcs:
        if a.v != r:
            rev[a.v].append(a)
    terms = list(inst.terminals)
    tset = set(terms)
    parent: dict[int, Arc] = {}
    in_tree = {r}
    load: dict[int, int] = {}  # load on the arc entering each tree vertex
    best: list = [None]

    def charge(t, sign) -> bool:
        ok = True
        x = t
        while x != r:
            load[x] += sign
            if load[x] > parent[x].capacity:
                ok = False
            x = parent[x].u
        return ok

    def slack_ok(x) -> bool:
        while x != r:
            if load[x] >= parent[x].capacity:
                return False
            x = parent[x].u
        return True

    def lower_bound(uncovered):
        # reverse Dijkstra from every uncovered terminal to the nearest tree vertex with spare
        # capacity above it, through non-tree vertices; max over terminals
        open_ = {x for x in in_tree if slack_ok(x)}
        worst = 0
        choice = None  # terminal with the smallest backward search region (fail first)
        for t in uncovered:
            dist = {t: 0}
            heap = [(0, t)]
            found = None
            while heap:
                d, v = heapq.heappop(heap)
                if d > dist[v]:
                    continue
                if v in open_:
                    found = d
                    break
                if v in in_tree:
                    continue
                for a in rev[v]:
                    nd = d + a.length
                    if nd < dist.get(a.u, INF):
                        dist[a.u] = nd
                        heapq.heappush(heap, (nd, a.u))
            if found is None:
                return None
            worst = max(worst, found)
            if choice is None or len(dist) < choice[0]:
                choice = (len(dist), t)
        return worst, choice[1]

    def search(length) -> bool:
        clock.tick()
        uncovered = [t for t in terms if t not in in_tree]
        if not uncovered:
            if best[0] is None or length < best[0].total_length:
                tree = [(parent[v].u, v) for v in parent]
                sol = make_solution(inst, prune_tree(tree, tset))
                assert check_feasible_tree(inst, sol).ok
                best[0] = sol
            return feasibility_only
        found = lower_bound(uncovered)
        if found is None:
            return False
        lb, t = found
        if best[0] is not None and length + lb >= best[0].total_length:
            return False
        path: list[Arc] = []
        on_path = {t}

        def extend(v, plen) -> bool:
            # path currently runs v -> ... -> t; pick the arc entering v
            clock.tick()
            for a in rev[v]:
                u = a.u
                if u in on_path:
                    continue
                if best[0] is not None and length + plen + a.length >= best[0].total_length:
                    continue
                path.append(a)
                if u in in_tree:
                    if slack_ok(u) and attach(plen + a.length):
                        return True
                else:
                    on_path.add(u)
                    if extend(u, plen + a.length):
                        return True
                    on_path.discard(u)
                path.pop()
            return False

        def attach(plen) -> bool:
            added = [a.v for a in path]
            for a in path:
                parent[a.v] = a
                load[a.v] = 0
                in_tree.add(a.v)
            charged = []
            ok = True
            # every terminal on the new path is covered now (path is stored leaf first)
            for v in added:
                if v in tset:
                    charged.append(v)
                    if not charge(v, 1):
                        ok = False
                        break
            done = ok and search(length + plen)
            for v in charged:
                charge(v, -1)
            for v in added:
                del parent[v], load[v]
                in_tree.discard(v)
            return done

        return extend(t, 0)

    search(0)
    return best[0]
