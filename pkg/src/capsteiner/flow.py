"""Min-cost flow by successive shortest paths, and the solvers built on it.

Vertex splitting turns "internally vertex-disjoint paths" into ordinary flow:
every split vertex ``v`` becomes ``(v, 0) -> (v, 1)`` with capacity 1.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Sequence

from capsteiner.core import Instance, LimitExceeded, PreconditionError, SteinerSolution, check_feasible_tree, make_solution
from capsteiner.graphs import dijkstra

SINK = ("sink",)


@dataclass(frozen=True)
class FlowNetwork:
    nodes: tuple[Hashable, ...]
    arcs: tuple[tuple[Hashable, Hashable, Fraction, int], ...]  # (u, v, cost, capacity)
    source: Hashable
    sink: Hashable
    lower: tuple[int, ...] | None = None  # optional lower bound per arc
    tags: tuple = field(default=(), compare=False)  # what each arc stands for in the original graph


@dataclass(frozen=True)
class FlowResult:
    value: int
    cost: Fraction
    arc_flows: tuple[int, ...]


class _Residual:
    def __init__(self, n):
        self.to: list[int] = []
        self.cap: list[int] = []
        self.cost: list = []
        self.adj: list[list[int]] = [[] for _ in range(n)]

    def add(self, u, v, cost, cap) -> int:
        i = len(self.to)
        self.to += [v, u]
        self.cap += [cap, 0]
        self.cost += [cost, -cost]
        self.adj[u].append(i)
        self.adj[v].append(i + 1)
        return i

    def push(self, s, t, amount):
        """Send up to ``amount`` units s -> t along successive shortest paths; returns (sent, cost)."""
        n = len(self.adj)
        pot = [0] * n
        sent, total = 0, 0
        while sent < amount:
            dist: list = [None] * n
            via = [-1] * n
            dist[s] = 0
            heap = [(0, s)]
            done = [False] * n
            while heap:
                d, u = heapq.heappop(heap)
                if done[u]:
                    continue
                done[u] = True
                for i in self.adj[u]:
                    if self.cap[i] <= 0:
                        continue
                    v = self.to[i]
                    nd = d + self.cost[i] + pot[u] - pot[v]
                    if dist[v] is None or nd < dist[v]:
                        dist[v] = nd
                        via[v] = i
                        heapq.heappush(heap, (nd, v))
            if dist[t] is None:
                break
            for v in range(n):
                if dist[v] is not None:
                    pot[v] += dist[v]
            f = amount - sent
            v = t
            while v != s:
                i = via[v]
                f = min(f, self.cap[i])
                v = self.to[i ^ 1]
            v = t
            while v != s:
                i = via[v]
                self.cap[i] -= f
                self.cap[i ^ 1] += f
                total += f * self.cost[i]
                v = self.to[i ^ 1]
            sent += f
        return sent, total


def min_cost_flow(net: FlowNetwork, demand: int) -> FlowResult | None:
    """Cheapest integral flow of exactly ``demand`` units, honouring lower bounds if given."""
    index = {x: i for i, x in enumerate(net.nodes)}
    n = len(net.nodes)
    lower = net.lower or (0,) * len(net.arcs)
    excess = [0] * (n + 2)
    res = _Residual(n + 2)
    sup, dem = n, n + 1
    handles = []
    base_cost = Fraction(0)
    for (u, v, cost, cap), lo in zip(net.arcs, lower):
        if cap <= 0 or cost < 0 or lo > cap:
            raise PreconditionError("arcs need positive capacity, nonnegative cost and lower <= capacity")
        handles.append(res.add(index[u], index[v], cost, cap - lo))
        if lo:
            excess[index[v]] += lo
            excess[index[u]] -= lo
            base_cost += lo * cost
    excess[index[net.source]] += demand
    excess[index[net.sink]] -= demand
    need = 0
    for x in range(n):
        if excess[x] > 0:
            res.add(sup, x, 0, excess[x])
            need += excess[x]
        elif excess[x] < 0:
            res.add(x, dem, 0, -excess[x])
    sent, cost = res.push(sup, dem, need)
    if sent < need:
        return None
    flows = tuple(res.cap[h ^ 1] + lo for h, lo in zip(handles, lower))
    result = FlowResult(demand, base_cost + cost, flows)
    _assert_valid(net, result)
    return result


def _assert_valid(net: FlowNetwork, res: FlowResult) -> None:
    lower = net.lower or (0,) * len(net.arcs)
    bal = {x: 0 for x in net.nodes}
    for (u, v, _, cap), lo, f in zip(net.arcs, lower, res.arc_flows):
        assert lo <= f <= cap
        bal[u] -= f
        bal[v] += f
    for x, b in bal.items():
        want = -res.value if x == net.source else res.value if x == net.sink else 0
        assert b == want, (x, b, want)
    assert sum(f * a[2] for f, a in zip(res.arc_flows, net.arcs)) == res.cost


def split_vertices(
    arcs: Iterable[tuple[int, int, Fraction]],
    vertices: Iterable[int],
    protected: Iterable[int],
    forced: Iterable[int] = (),
    capacity: int = 1,
) -> FlowNetwork:
    """Flow image of a digraph where each non-protected vertex has throughput 1.

    Node ``(v, 0)`` receives the in-arcs of ``v``, node ``(v, 1)`` emits its
    out-arcs; protected vertices stay whole as ``(v, 0) == (v, 1)`` via a
    single node ``v``.  Vertices in ``forced`` get lower bound 1 on their
    split arc.  Arc tags are ``("arc", u, v)`` or ``("split", v)``.  Source and
    sink are left for the caller to set via ``dataclasses.replace``.
    """
    protected = set(protected)
    forced = set(forced)
    nodes, net_arcs, lower, tags = [], [], [], []

    def head(v):
        return v if v in protected else (v, 0)

    def tail(v):
        return v if v in protected else (v, 1)

    for v in vertices:
        if v in protected:
            nodes.append(v)
        else:
            nodes += [(v, 0), (v, 1)]
            net_arcs.append(((v, 0), (v, 1), Fraction(0), 1))
            lower.append(1 if v in forced else 0)
            tags.append(("split", v))
    for u, v, length in arcs:
        net_arcs.append((tail(u), head(v), Fraction(length), capacity))
        lower.append(0)
        tags.append(("arc", u, v))
    return FlowNetwork(tuple(nodes), tuple(net_arcs), None, None, tuple(lower), tuple(tags))


def _decompose(net: FlowNetwork, flows: Sequence[int], start, stop) -> tuple[list[list[int]], bool]:
    """Split a flow into start->stop paths of original vertices; reports whether cycles were left over."""
    remaining = list(flows)
    out: dict = {}
    for i, (u, _, _, _) in enumerate(net.arcs):
        out.setdefault(u, []).append(i)
    paths = []
    while True:
        walk_arcs: list[int] = []
        x = start
        seen = {x: 0}
        while x != stop:
            nxt = next((i for i in out.get(x, ()) if remaining[i] > 0), None)
            if nxt is None:
                break
            walk_arcs.append(nxt)
            x = net.arcs[nxt][1]
            if x in seen:
                # cancel the cycle we just closed
                cut = seen[x]
                for i in walk_arcs[cut:]:
                    remaining[i] -= 1
                for y in list(seen):
                    if seen[y] > cut:
                        del seen[y]
                walk_arcs = walk_arcs[:cut]
            else:
                seen[x] = len(walk_arcs)
        if x != stop:
            break
        for i in walk_arcs:
            remaining[i] -= 1
        path = []
        for i in walk_arcs:
            tag = net.tags[i]
            if tag[0] == "arc":
                if not path:
                    path.append(tag[1])
                path.append(tag[2])
        paths.append(path)
    return paths, any(remaining)


def solve_unit_capacity(inst: Instance) -> SteinerSolution | None:
    """Optimal tree when every capacity is 1: K internally disjoint root-terminal paths."""
    if any(e.capacity != 1 for e in inst.edges):
        raise PreconditionError("solve_unit_capacity needs every capacity equal to 1")
    r = inst.root
    arcs = [(a.u, a.v, a.length) for a in inst.arcs if a.v != r]
    net = split_vertices(arcs, inst.vertices, protected=[r])
    extra = tuple(((t, 1), SINK, Fraction(0), 1) for t in inst.terminals)
    net = FlowNetwork(net.nodes + (SINK,), net.arcs + extra, r, SINK,
                      net.lower + (0,) * len(extra), net.tags + tuple(("sink", t) for t in inst.terminals))
    res = min_cost_flow(net, inst.K)
    if res is None:
        return None
    paths, _ = _decompose(net, res.arc_flows, r, SINK)
    tree = list(dict.fromkeys((p[i], p[i + 1]) for p in paths for i in range(len(p) - 1)))
    sol = make_solution(inst, tree)
    assert check_feasible_tree(inst, sol).ok
    assert sol.total_length <= res.cost
    return sol


def _bundle_network(arcs, vertices, w, sinks, forced):
    net = split_vertices(arcs, vertices, protected=[w], forced=forced)
    extra = tuple(((t, 1), SINK, Fraction(0), 1) for t in sinks)
    return FlowNetwork(net.nodes + (SINK,), net.arcs + extra, w, SINK,
                       net.lower + (0,) * len(extra), net.tags + tuple(("sink", t) for t in sinks))


def min_length_disjoint_bundle(
    arcs: Iterable[tuple[int, int, Fraction]],
    vertices: Iterable[int],
    w: int,
    sinks: tuple[int, int],
    forced: Iterable[int] = (),
    max_nodes: int = 2_000_000,
) -> tuple[tuple[list[int], list[int]], Fraction] | None:
    """Two internally disjoint paths ``w -> t_i`` and ``w -> t_j`` covering ``forced``, of minimum length.

    ``arcs`` is the directed arc list (both directions for undirected graphs).
    The flow with lower bounds is exact when its decomposition is two simple
    paths.  In graphs with cycles a lower bound can be met by a detached cycle;
    then the flow value is only a lower bound and an exact search takes over.
    """
    forced = set(forced)
    if forced & {w, *sinks}:
        raise PreconditionError("forced vertices must avoid w and the two sinks")
    arcs = [(u, v, Fraction(l)) for u, v, l in arcs if v != w and u not in sinks]
    vertices = list(vertices)
    net = _bundle_network(arcs, vertices, w, sinks, forced)
    res = min_cost_flow(net, 2)
    if res is None:
        return None
    paths, leftover = _decompose(net, res.arc_flows, w, SINK)
    covered = {x for p in paths for x in p}
    if not leftover and forced <= covered:
        by_sink = {p[-1]: p for p in paths}
        return (by_sink[sinks[0]], by_sink[sinks[1]]), res.cost
    return _bundle_search(arcs, w, sinks, forced, res.cost, max_nodes)


def _bundle_search(arcs, w, sinks, forced, lower_bound, max_nodes):
    adj: dict = {}
    radj: dict = {}
    for u, v, l in arcs:
        adj.setdefault(u, []).append((v, l))
        radj.setdefault(v, []).append((u, l))
    to = [dijkstra(radj, [t])[0] for t in sinks]
    best: list = [None, None]
    steps = [0]

    def paths(k, banned, spent):
        t, other, dist = sinks[k], sinks[1 - k], to[k]
        path = [w]
        on = {w}

        def dfs(u, length):
            steps[0] += 1
            if steps[0] > max_nodes:
                raise LimitExceeded("bundle search exceeded its node budget")
            if best[0] is not None and spent + length + dist.get(u, 0) >= best[0]:
                return
            if u == t:
                yield list(path), length
                return
            for v, l in sorted(adj.get(u, ()), key=lambda x: (dist.get(x[0], 0) + x[1], x[0])):
                if v in on or v in banned or v == other or v not in dist:
                    continue
                on.add(v)
                path.append(v)
                yield from dfs(v, length + l)
                path.pop()
                on.discard(v)

        yield from dfs(w, Fraction(0))

    for p1, l1 in paths(0, set(), 0):
        for p2, l2 in paths(1, set(p1[1:]), l1):
            if forced <= set(p1) | set(p2) and (best[0] is None or l1 + l2 < best[0]):
                best[0], best[1] = l1 + l2, (p1, p2)
                if best[0] == lower_bound:
                    return best[1], best[0]
    if best[1] is None:
        return None
    return best[1], best[0]
