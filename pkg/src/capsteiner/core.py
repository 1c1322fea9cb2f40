"""Instance and solution model, feasibility checking, preprocessing and skeletons.

Vertices are 1-based integers.  Undirected instances store each edge once; the
solvers see them through :attr:`Instance.arcs`, which lists both orientations.
A solution is always a set of arcs oriented away from the root.
"""

from __future__ import annotations

import math
from collections import defaultdict, deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from typing import Iterable, NamedTuple

KINDS = ("digraph", "dag", "undirected")


class CapSteinerError(Exception):
    """Base class for errors raised by this package."""


class Infeasible(CapSteinerError):
    pass


class LimitExceeded(CapSteinerError):
    pass


class NotADag(CapSteinerError):
    pass


class PreconditionError(CapSteinerError, ValueError):
    pass


class Edge(NamedTuple):
    u: int
    v: int
    length: Fraction
    capacity: int


class Arc(NamedTuple):
    """A directed view of an edge; ``length`` is an int whenever it is integral."""

    u: int
    v: int
    length: int | Fraction
    capacity: int
    edge: int


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(value).limit_denominator()
    return Fraction(value)


def _compact(x: Fraction) -> int | Fraction:
    return x.numerator if x.denominator == 1 else x


@dataclass(frozen=True)
class Instance:
    kind: str
    n: int
    edges: tuple[Edge, ...]
    root: int
    terminals: tuple[int, ...]

    @classmethod
    def build(cls, kind: str, n: int, edges: Iterable, root: int, terminals: Iterable[int]) -> Instance:
        """Convenience constructor taking ``(u, v, length, capacity)`` tuples."""
        es = tuple(Edge(int(u), int(v), as_fraction(l), int(c)) for u, v, l, c in edges)
        return cls(kind, int(n), es, int(root), tuple(int(t) for t in terminals))

    @property
    def K(self) -> int:
        return len(self.terminals)

    @property
    def directed(self) -> bool:
        return self.kind != "undirected"

    @cached_property
    def arcs(self) -> tuple[Arc, ...]:
        out = []
        for i, e in enumerate(self.edges):
            length = _compact(e.length)
            out.append(Arc(e.u, e.v, length, e.capacity, i))
            if self.kind == "undirected":
                out.append(Arc(e.v, e.u, length, e.capacity, i))
        return tuple(out)

    @cached_property
    def out_arcs(self) -> dict[int, list[Arc]]:
        adj: dict[int, list[Arc]] = {v: [] for v in self.vertices}
        for a in self.arcs:
            adj[a.u].append(a)
        return adj

    @cached_property
    def in_arcs(self) -> dict[int, list[Arc]]:
        adj: dict[int, list[Arc]] = {v: [] for v in self.vertices}
        for a in self.arcs:
            adj[a.v].append(a)
        return adj

    @cached_property
    def arc_map(self) -> dict[tuple[int, int], Arc]:
        return {(a.u, a.v): a for a in self.arcs}

    @cached_property
    def degree(self) -> dict[int, int]:
        """Degree in the underlying undirected graph."""
        deg = {v: 0 for v in self.vertices}
        for e in self.edges:
            deg[e.u] += 1
            deg[e.v] += 1
        return deg

    @property
    def vertices(self) -> range:
        return range(1, self.n + 1)

    @cached_property
    def terminal_set(self) -> frozenset[int]:
        return frozenset(self.terminals)

    @property
    def c_min(self) -> int:
        return min(e.capacity for e in self.edges)

    @property
    def c_max(self) -> int:
        return max(e.capacity for e in self.edges)

    def replace(self, **changes) -> Instance:
        fields = dict(kind=self.kind, n=self.n, edges=self.edges, root=self.root, terminals=self.terminals)
        fields.update(changes)
        if "edges" in changes:
            fields["edges"] = tuple(Edge(int(u), int(v), as_fraction(l), int(c)) for u, v, l, c in fields["edges"])
        return Instance(**fields)

    def with_capacities(self, capacity) -> Instance:
        """Copy with every capacity set to ``capacity`` (an int or a callable on the edge)."""
        f = capacity if callable(capacity) else (lambda e: capacity)
        return self.replace(edges=[(e.u, e.v, e.length, f(e)) for e in self.edges])

    def with_lengths(self, length) -> Instance:
        f = length if callable(length) else (lambda e: length)
        return self.replace(edges=[(e.u, e.v, f(e), e.capacity) for e in self.edges])


@dataclass(frozen=True)
class SteinerSolution:
    arcs: tuple[tuple[int, int], ...]
    total_length: Fraction
    load: dict[tuple[int, int], int] = field(compare=False, hash=False)

    @property
    def vertices(self) -> set[int]:
        vs: set[int] = set()
        for u, v in self.arcs:
            vs.add(u)
            vs.add(v)
        return vs

    def children(self) -> dict[int, list[int]]:
        ch: dict[int, list[int]] = defaultdict(list)
        for u, v in self.arcs:
            ch[u].append(v)
        return ch


class Violation(NamedTuple):
    kind: str
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "; ".join(f"{v.kind}: {v.detail}" for v in self.violations)


@dataclass(frozen=True)
class FeasibilityReport(ValidationReport):
    loads: dict[tuple[int, int], int] = field(default_factory=dict, compare=False, hash=False)


def _reachable(inst: Instance, start: int) -> set[int]:
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for a in inst.out_arcs[u]:
            if a.v not in seen:
                seen.add(a.v)
                stack.append(a.v)
    return seen


def _has_cycle(inst: Instance) -> bool:
    indeg = {v: 0 for v in inst.vertices}
    for a in inst.arcs:
        indeg[a.v] += 1
    queue = deque(v for v, d in indeg.items() if d == 0)
    seen = 0
    while queue:
        u = queue.popleft()
        seen += 1
        for a in inst.out_arcs[u]:
            indeg[a.v] -= 1
            if indeg[a.v] == 0:
                queue.append(a.v)
    return seen < inst.n


def validate_instance(inst: Instance) -> ValidationReport:
    bad: list[Violation] = []
    if inst.kind not in KINDS:
        return ValidationReport((Violation("malformed", f"unknown kind {inst.kind!r}"),))
    if inst.n < 1:
        return ValidationReport((Violation("malformed", "vertex count must be positive"),))
    in_range = lambda v: 1 <= v <= inst.n  # noqa: E731
    if not in_range(inst.root):
        bad.append(Violation("malformed", f"root {inst.root} out of range"))
    if len(set(inst.terminals)) != len(inst.terminals):
        bad.append(Violation("malformed", "terminals must be distinct"))
    if inst.K < 2:
        bad.append(Violation("malformed", "at least two terminals are required"))
    for t in inst.terminals:
        if not in_range(t):
            bad.append(Violation("malformed", f"terminal {t} out of range"))
        if t == inst.root:
            bad.append(Violation("malformed", "the root cannot be a terminal"))
    seen: set = set()
    for i, e in enumerate(inst.edges):
        where = f"edge {i + 1} ({e.u},{e.v})"
        if not (in_range(e.u) and in_range(e.v)):
            bad.append(Violation("malformed", f"{where}: endpoint out of range"))
            continue
        if e.u == e.v:
            bad.append(Violation("malformed", f"{where}: self-loop"))
        key = (e.u, e.v) if inst.directed else frozenset((e.u, e.v))
        if key in seen:
            bad.append(Violation("malformed", f"{where}: parallel edge"))
        seen.add(key)
        if e.capacity <= 0:
            bad.append(Violation("malformed", f"{where}: capacity must be positive"))
        if e.length < 0:
            bad.append(Violation("malformed", f"{where}: length must be nonnegative"))
    if bad:
        return ValidationReport(tuple(bad))
    if inst.kind == "dag" and _has_cycle(inst):
        bad.append(Violation("cycle", "graph declared as dag contains a directed cycle"))
    reach = _reachable(inst, inst.root)
    for t in inst.terminals:
        if t not in reach:
            bad.append(Violation("unreachable-terminal", f"terminal {t} is not reachable from root {inst.root}"))
    return ValidationReport(tuple(bad))


def compute_loads(arcs: Iterable[tuple[int, int]], terminals: Iterable[int]) -> dict[tuple[int, int], int]:
    """Number of terminals below each arc, found by walking parent pointers."""
    arcs = list(arcs)
    parent = {}
    for u, v in arcs:
        parent.setdefault(v, u)
    load = {a: 0 for a in arcs}
    for t in terminals:
        v, steps = t, 0
        while v in parent and steps <= len(arcs):
            u = parent[v]
            load[(u, v)] += 1
            v = u
            steps += 1
    return load


def make_solution(inst: Instance, arcs: Iterable[tuple[int, int]]) -> SteinerSolution:
    arcs = tuple((int(u), int(v)) for u, v in arcs)
    total = Fraction(0)
    amap = inst.arc_map
    for a in arcs:
        if a in amap:
            total += amap[a].length
    return SteinerSolution(arcs, total, compute_loads(arcs, inst.terminals))


def check_feasible_tree(inst: Instance, sol: SteinerSolution | Iterable[tuple[int, int]]) -> FeasibilityReport:
    arcs = list(sol.arcs if isinstance(sol, SteinerSolution) else sol)
    bad: list[Violation] = []
    amap = inst.arc_map
    for u, v in arcs:
        if (u, v) not in amap:
            what = "edge" if inst.kind == "undirected" else "arc"
            bad.append(Violation("bad-orientation", f"({u},{v}) is not an {what} of the instance"))
    if len(set(arcs)) != len(arcs):
        bad.append(Violation("not-a-tree", "repeated arc"))
    parent: dict[int, int] = {}
    for u, v in arcs:
        if v == inst.root:
            bad.append(Violation("not-a-tree", f"arc ({u},{v}) enters the root"))
        elif v in parent and parent[v] != u:
            bad.append(Violation("not-a-tree", f"vertex {v} has in-degree 2"))
        parent.setdefault(v, u)
    children: dict[int, list[int]] = defaultdict(list)
    for u, v in arcs:
        children[u].append(v)
    reached = {inst.root}
    stack = [inst.root]
    while stack:
        u = stack.pop()
        for v in children[u]:
            if v not in reached:
                reached.add(v)
                stack.append(v)
    stranded = {v for a in arcs for v in a} - reached
    if stranded:
        kind = "cycle" if _on_parent_cycle(parent, stranded) else "not-a-tree"
        bad.append(Violation(kind, f"vertices {sorted(stranded)} are not reachable from the root"))
    for t in inst.terminals:
        if t not in reached:
            bad.append(Violation("unreachable-terminal", f"terminal {t} is not spanned"))
    loads = {}
    if not bad:
        # recount bottom-up over the tree rather than trusting the walk in compute_loads
        order = []
        stack = [inst.root]
        while stack:
            u = stack.pop()
            order.append(u)
            stack.extend(children[u])
        below = {v: (1 if v in inst.terminal_set else 0) for v in order}
        for v in reversed(order):
            if v in parent:
                below[parent[v]] += below[v]
        for u, v in arcs:
            loads[(u, v)] = below[v]
            cap = amap[(u, v)].capacity
            if below[v] > cap:
                bad.append(Violation("capacity-exceeded", f"arc ({u},{v}) carries {below[v]} terminals, capacity {cap}"))
    return FeasibilityReport(tuple(bad), loads)


def _on_parent_cycle(parent: dict[int, int], stranded: set[int]) -> bool:
    for start in stranded:
        seen = set()
        v = start
        while v in parent and v not in seen:
            seen.add(v)
            v = parent[v]
        if v in seen:
            return True
    return False


def to_digraph(inst: Instance) -> Instance:
    if inst.directed:
        raise PreconditionError("instance is already directed")
    edges = []
    for e in inst.edges:
        edges.append(e)
        edges.append(Edge(e.v, e.u, e.length, e.capacity))
    return Instance("digraph", inst.n, tuple(edges), inst.root, inst.terminals)


def normalize_terminals(inst: Instance, capacity: int = 1) -> Instance:
    """Make every terminal a leaf and drop dangling non-terminal leaves.

    A terminal of degree other than one gets a pendant copy attached by a
    length-0 edge of the given capacity (any value >= 1 works since the edge
    carries one terminal), and the copy replaces it in the terminal list.
    New vertices are numbered from ``n + 1`` in terminal order.
    """
    edges = list(inst.edges)
    n = inst.n
    terminals = list(inst.terminals)
    deg = dict(inst.degree)
    for i, t in enumerate(terminals):
        if deg[t] != 1:
            n += 1
            edges.append(Edge(t, n, Fraction(0), capacity))
            terminals[i] = n
    keep = set(terminals) | {inst.root}
    deg = defaultdict(int)
    for e in edges:
        deg[e.u] += 1
        deg[e.v] += 1
    alive = [True] * len(edges)
    incident: dict[int, list[int]] = defaultdict(list)
    for i, e in enumerate(edges):
        incident[e.u].append(i)
        incident[e.v].append(i)
    queue = deque(v for v in range(1, n + 1) if deg[v] == 1 and v not in keep)
    while queue:
        v = queue.popleft()
        if deg[v] != 1:
            continue
        for i in incident[v]:
            if alive[i]:
                alive[i] = False
                e = edges[i]
                other = e.v if e.u == v else e.u
                deg[v] -= 1
                deg[other] -= 1
                if deg[other] == 1 and other not in keep:
                    queue.append(other)
    new_edges = tuple(e for e, a in zip(edges, alive) if a)
    if n == inst.n and new_edges == inst.edges:
        return inst
    return Instance(inst.kind, n, new_edges, inst.root, tuple(terminals))


def restore_solution(original: Instance, normalized: Instance, sol: SteinerSolution | None) -> SteinerSolution | None:
    """Map a solution of ``normalize_terminals(original)`` back to ``original``."""
    if sol is None:
        return None
    arcs = [(u, v) for u, v in sol.arcs if v <= original.n]
    return make_solution(original, arcs)


def normalize_lengths(inst: Instance) -> tuple[Instance, Fraction]:
    """Scale lengths to positive integers.

    Positive lengths are multiplied by ``D * |E|`` where ``D`` is the lcm of the
    denominators; zero lengths become 1.  Returns the new instance and the scale.
    """
    D = reduce(math.lcm, (e.length.denominator for e in inst.edges), 1)
    scale = Fraction(D * len(inst.edges))
    edges = tuple(
        Edge(e.u, e.v, e.length * scale if e.length > 0 else Fraction(1), e.capacity) for e in inst.edges
    )
    return inst.replace(edges=edges), scale


@dataclass(frozen=True)
class Skeleton:
    root: int
    vertices: tuple[int, ...]
    arcs: tuple[tuple[int, int], ...]
    below: dict[int, int] = field(compare=False, hash=False)

    @property
    def root_degree(self) -> int:
        return sum(1 for u, _ in self.arcs if u == self.root)

    @property
    def n_R(self) -> int:
        return len(self.vertices)

    @property
    def K(self) -> int:
        return self.below.get(self.root, 0)

    @property
    def l_min(self) -> int:
        """Fewest vertices on a root-to-terminal path of the skeleton."""
        children: dict[int, list[int]] = defaultdict(list)
        for u, v in self.arcs:
            children[u].append(v)
        frontier = [self.root]
        count = 1
        while frontier:
            nxt = []
            for u in frontier:
                if not children[u]:
                    return count
                nxt.extend(children[u])
            frontier = nxt
            count += 1
        return count

    def canonical(self) -> tuple:
        return (self.root, tuple(sorted(self.arcs)))


def skeleton_of_arcs(root: int, arcs: Iterable[tuple[int, int]], terminals: Iterable[int]) -> Skeleton:
    """Contract every non-terminal vertex with one child into the arc above it."""
    arcs = list(arcs)
    terminals = set(terminals)
    children: dict[int, list[int]] = defaultdict(list)
    for u, v in arcs:
        children[u].append(v)
    for v in {v for _, v in arcs}:
        if not children[v] and v not in terminals:
            raise PreconditionError(f"vertex {v} is a non-terminal leaf; prune the tree first")
    keep = lambda v: v == root or v in terminals or len(children[v]) >= 2  # noqa: E731
    sk_arcs = []
    stack = [root]
    verts = [root]
    while stack:
        u = stack.pop()
        for c in children[u]:
            v = c
            while not keep(v):
                (v,) = children[v]
            sk_arcs.append((u, v))
            verts.append(v)
            stack.append(v)
    below: dict[int, int] = {}

    sk_children: dict[int, list[int]] = defaultdict(list)
    for u, v in sk_arcs:
        sk_children[u].append(v)

    def count(v: int) -> int:
        below[v] = (1 if v in terminals else 0) + sum(count(c) for c in sk_children[v])
        return below[v]

    count(root)
    return Skeleton(root, tuple(verts), tuple(sk_arcs), below)


def extract_skeleton(sol: SteinerSolution, inst: Instance) -> Skeleton:
    return skeleton_of_arcs(inst.root, sol.arcs, inst.terminals)


def property1_bound(K: int, d_r: int) -> int:
    return 2 * K + 1 - d_r


def property2_bound(n_R: int, d_r: int) -> float:
    return math.log2(n_R) + 1 if d_r == 1 else math.log2(n_R + 1)
