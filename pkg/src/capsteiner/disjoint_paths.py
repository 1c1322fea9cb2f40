"""Vertex-disjoint path systems, optionally with per-pair admissible labels.

``labvdp_dag_dp`` is the exact polynomial DP for DAGs with a fixed number of
pairs.  ``vdisj_search`` is an exact branch-and-bound search that works on any
graph kind; it is exponential in the worst case and meant for small graphs.
"""

from __future__ import annotations

import sys
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

from capsteiner.core import LimitExceeded, NotADag, PreconditionError
from capsteiner.graphs import dijkstra, topological_order


class LabelledEdge(NamedTuple):
    u: int
    v: int
    length: Fraction
    label: int


@dataclass(frozen=True)
class LabVdpInstance:
    kind: str
    n: int
    edges: tuple[LabelledEdge, ...]
    pairs: tuple[tuple[int, int], ...]
    label_sets: tuple[frozenset[int] | None, ...] | None = None
    k: int = 1

    @classmethod
    def build(cls, kind, n, edges, pairs, label_sets=None, k=None):
        es = tuple(LabelledEdge(int(u), int(v), Fraction(l), int(lab)) for u, v, l, lab in edges)
        if k is None:
            k = max([e.label for e in es], default=1)
        sets = None
        if label_sets is not None:
            sets = tuple(None if s is None else frozenset(s) for s in label_sets)
        return cls(kind, int(n), es, tuple((int(a), int(b)) for a, b in pairs), sets, int(k))

    def allowed(self, i: int) -> frozenset[int] | None:
        if self.label_sets is None:
            return None
        return self.label_sets[i]

    def validate(self) -> None:
        ends = [x for pr in self.pairs for x in pr]
        if len(set(ends)) != len(ends):
            raise PreconditionError("source-sink pairs must be mutually vertex-disjoint")
        for e in self.edges:
            if not 1 <= e.label <= self.k:
                raise PreconditionError(f"label {e.label} outside 1..{self.k}")
        if self.label_sets is not None and len(self.label_sets) != len(self.pairs):
            raise PreconditionError("one label set per pair is required")


@dataclass(frozen=True)
class VdpInstance:
    """Plain vertex-disjoint paths input: a graph with lengths and source-sink pairs."""

    kind: str
    n: int
    edges: tuple[tuple[int, int, Fraction], ...]
    pairs: tuple[tuple[int, int], ...]

    @classmethod
    def build(cls, kind, n, edges, pairs):
        return cls(kind, int(n), tuple((int(u), int(v), Fraction(l)) for u, v, l in edges),
                   tuple((int(a), int(b)) for a, b in pairs))

    @property
    def p(self) -> int:
        return len(self.pairs)

    def as_labelled(self) -> LabVdpInstance:
        return LabVdpInstance.build(self.kind, self.n, [(u, v, l, 1) for u, v, l in self.edges], self.pairs)


@dataclass(frozen=True)
class DisjointPathsReport:
    paths: tuple[tuple[int, ...], ...]
    total_length: Fraction
    exact: bool = True
    guarantee: Fraction | None = Fraction(1)


def _arc_lists(inst: LabVdpInstance):
    out = defaultdict(list)
    for e in inst.edges:
        out[e.u].append((e.v, e.length, e.label))
        if inst.kind == "undirected":
            out[e.v].append((e.u, e.length, e.label))
    return out


def check_paths(inst: LabVdpInstance, paths: Sequence[Sequence[int]]) -> Fraction:
    """Independent validity check; returns the total length or raises ``ValueError``."""
    if len(paths) != len(inst.pairs):
        raise ValueError("wrong number of paths")
    lengths = {}
    for e in inst.edges:
        lengths[(e.u, e.v)] = (e.length, e.label)
        if inst.kind == "undirected":
            lengths[(e.v, e.u)] = (e.length, e.label)
    seen: set[int] = set()
    total = Fraction(0)
    for i, path in enumerate(paths):
        s, t = inst.pairs[i]
        if path[0] != s or path[-1] != t:
            raise ValueError(f"path {i} does not link {s} to {t}")
        allowed = inst.allowed(i)
        for x in path:
            if x in seen:
                raise ValueError(f"vertex {x} used twice")
            seen.add(x)
        for a, b in zip(path, path[1:]):
            if (a, b) not in lengths:
                raise ValueError(f"({a},{b}) is not an arc")
            length, label = lengths[(a, b)]
            if allowed is not None and label not in allowed:
                raise ValueError(f"label {label} on ({a},{b}) not admissible for pair {i}")
            total += length
    return total


def labvdp_dag_dp(inst: LabVdpInstance, order: Sequence[int] | None = None) -> DisjointPathsReport | None:
    """Exact minimum-length labelled vertex-disjoint paths in a DAG.

    ``f(v_1..v_p)`` is the cheapest system of disjoint paths ``s_i -> v_i``.
    The component furthest along the topological order is always the one
    retreated, which is what keeps the paths disjoint.  Only tuples reachable
    backwards from the sinks are ever evaluated.  ``order`` overrides the
    topological numbering (it must be a valid one).
    """
    if inst.kind == "undirected":
        raise NotADag("labelled DP needs a directed acyclic graph")
    inst.validate()
    verts = range(1, inst.n + 1)
    arcs = [(e.u, e.v) for e in inst.edges]
    if order is None:
        order = topological_order(verts, arcs)
    else:
        order = list(order)
        pos = {v: i for i, v in enumerate(order)}
        if sorted(order) != list(verts) or any(pos[u] >= pos[v] for u, v in arcs):
            raise NotADag("supplied order is not a topological order")
    num = {v: i for i, v in enumerate(order)}
    p = len(inst.pairs)
    src = [s for s, _ in inst.pairs]
    preds = defaultdict(list)
    succ = defaultdict(list)
    for e in inst.edges:
        preds[e.v].append((e.u, e.length, e.label))
        succ[e.u].append((e.v, e.label))

    # vertices that can lie on an admissible s_i -> s'_i path
    usable = []
    for i, (s, t) in enumerate(inst.pairs):
        allowed = inst.allowed(i)
        ok = lambda lab: allowed is None or lab in allowed  # noqa: E731
        fwd = {s}
        stack = [s]
        while stack:
            u = stack.pop()
            for v, lab in succ[u]:
                if ok(lab) and v not in fwd:
                    fwd.add(v)
                    stack.append(v)
        back = {t}
        stack = [t]
        while stack:
            v = stack.pop()
            for u, _, lab in preds[v]:
                if ok(lab) and u not in back:
                    back.add(u)
                    stack.append(u)
        usable.append(fwd & back)
    if any(t not in usable[i] for i, (_, t) in enumerate(inst.pairs)):
        return None

    memo: dict[tuple[int, ...], tuple] = {}
    base = tuple(src)

    def f(state: tuple[int, ...]):
        if state in memo:
            return memo[state]
        h = -1
        for i in range(p):
            if num[state[i]] > num[src[i]]:
                if h < 0 or num[state[i]] > num[state[h]]:
                    h = i
            elif state[i] != src[i]:
                memo[state] = (None, None)
                return memo[state]
        if h < 0:
            memo[state] = (Fraction(0), None) if state == base else (None, None)
            return memo[state]
        vh = state[h]
        if any(state[i] == vh for i in range(p) if i != h):
            memo[state] = (None, None)
            return memo[state]
        allowed = inst.allowed(h)
        best, arg = None, None
        for v, length, lab in preds[vh]:
            if allowed is not None and lab not in allowed:
                continue
            if num[v] < num[src[h]] or v not in usable[h]:
                continue
            prev = state[:h] + (v,) + state[h + 1:]
            val, _ = f(prev)
            if val is None:
                continue
            if best is None or length + val < best:
                best, arg = length + val, prev
        memo[state] = (best, arg)
        return memo[state]

    target = tuple(t for _, t in inst.pairs)
    limit = sys.getrecursionlimit()
    needed = p * inst.n + 100
    if needed > limit:
        sys.setrecursionlimit(needed)
    value, _ = f(target)
    if value is None:
        return None
    paths = [[t] for t in target]
    state = target
    while True:
        _, prev = memo[state]
        if prev is None:
            break
        for i in range(p):
            if prev[i] != state[i]:
                paths[i].append(prev[i])
        state = prev
    result = tuple(tuple(reversed(pth)) for pth in paths)
    return DisjointPathsReport(result, value, exact=True, guarantee=Fraction(1))


def vdisj_search(
    inst: LabVdpInstance,
    *,
    use_lengths: bool = True,
    max_nodes: int = 5_000_000,
) -> DisjointPathsReport | None:
    """Exact disjoint paths (labelled or not) by branch and bound over simple paths.

    Works on undirected graphs, digraphs and DAGs.  With ``use_lengths=False``
    it answers the feasibility question and stops at the first system found.
    Raises ``LimitExceeded`` after ``max_nodes`` search steps.
    """
    inst.validate()
    out = _arc_lists(inst)
    p = len(inst.pairs)
    endpoints = {x for pr in inst.pairs for x in pr}
    allowed = [inst.allowed(i) for i in range(p)]
    zero = Fraction(0)

    def adjacency_for(i):
        adj = {}
        for u, lst in out.items():
            adj[u] = [(v, l if use_lengths else zero) for v, l, lab in lst
                      if (allowed[i] is None or lab in allowed[i])]
        return adj

    adjs = [adjacency_for(i) for i in range(p)]
    # reverse distances to each sink, ignoring other pairs: an admissible lower bound
    to_sink = []
    for i, (s, t) in enumerate(inst.pairs):
        radj = defaultdict(list)
        for u, lst in adjs[i].items():
            for v, l in lst:
                if v not in endpoints or v == t:
                    if u not in endpoints or u == s:
                        radj[v].append((u, l))
        dist, _ = dijkstra(radj, [t])
        if s not in dist:
            return None
        to_sink.append(dist)
    rest_lb = [zero] * (p + 1)
    for i in range(p - 1, -1, -1):
        rest_lb[i] = rest_lb[i + 1] + to_sink[i][inst.pairs[i][0]]

    best: list = [None, None]
    steps = [0]

    def still_connected(i, used):
        # every later pair must still be linkable avoiding used vertices
        for j in range(i, p):
            s, t = inst.pairs[j]
            seen = {s}
            stack = [s]
            found = False
            while stack and not found:
                u = stack.pop()
                for v, _ in adjs[j].get(u, ()):
                    if v == t:
                        found = True
                        break
                    if v in seen or v in used or v in endpoints:
                        continue
                    seen.add(v)
                    stack.append(v)
            if not found:
                return False
        return True

    def rec(i, used, chosen, total):
        if best[0] is not None and (total + rest_lb[i] >= best[0] or not use_lengths):
            return
        if i == p:
            best[0], best[1] = total, list(chosen)
            return
        if not still_connected(i, used):
            return
        s, t = inst.pairs[i]
        dist = to_sink[i]
        adj = adjs[i]
        path = [s]
        on = {s}

        def dfs(u, length):
            steps[0] += 1
            if steps[0] > max_nodes:
                raise LimitExceeded("disjoint path search exceeded its node budget")
            if best[0] is not None and (total + length + dist.get(u, 0) + rest_lb[i + 1] >= best[0]
                                        or not use_lengths):
                return
            if u == t:
                chosen.append(tuple(path))
                rec(i + 1, used | on, chosen, total + length)
                chosen.pop()
                return
            nxt = [(dist[v] + l, v, l) for v, l in adj.get(u, ()) if v in dist and v not in on and v not in used
                   and (v not in endpoints or v == t)]
            nxt.sort(key=lambda x: (x[0], x[1]))
            for _, v, l in nxt:
                on.add(v)
                path.append(v)
                dfs(v, length + l)
                path.pop()
                on.discard(v)

        dfs(s, zero)

    rec(0, frozenset(), [], zero)
    if best[1] is None:
        return None
    paths = tuple(best[1])
    total = check_paths(inst, paths)
    return DisjointPathsReport(paths, total, exact=True, guarantee=Fraction(1))
