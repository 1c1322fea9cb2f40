"""Potential skeletons and labelled-tree enumeration."""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Sequence

from capsteiner.core import Instance, PreconditionError, Skeleton, property1_bound, property2_bound


@dataclass(frozen=True)
class PotentialSkeleton(Skeleton):
    junctions: tuple[int, ...] = ()

    def children(self) -> dict[int, list[int]]:
        ch: dict[int, list[int]] = defaultdict(list)
        for u, v in self.arcs:
            ch[u].append(v)
        return ch


def skeleton_bounds(K: int, d_r: int) -> tuple[int, int]:
    """Largest possible vertex count and the matching shortest-branch bound."""
    if K < 2 or d_r < 1:
        raise PreconditionError("need K >= 2 and d_r >= 1")
    n_R = property1_bound(K, d_r)
    return n_R, math.ceil(property2_bound(n_R, d_r))


def prufer_decode(seq: Sequence[int], labels: Sequence[int]) -> list[tuple[int, int]]:
    """Edges of the labelled tree with Prüfer sequence ``seq`` over positions into ``labels``."""
    n = len(seq) + 2
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    edges = []
    for x in seq:
        leaf = next(i for i in range(n) if degree[i] == 1)
        edges.append((labels[leaf], labels[x]))
        degree[leaf] -= 1
        degree[x] -= 1
    u, v = [i for i in range(n) if degree[i] == 1]
    edges.append((labels[u], labels[v]))
    return edges


def orient(edges: Iterable[tuple[int, int]], root: int) -> tuple[tuple[int, int], ...]:
    adj = defaultdict(list)
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    arcs = []
    seen = {root}
    stack = [root]
    while stack:
        u = stack.pop()
        for v in sorted(adj[u]):
            if v not in seen:
                seen.add(v)
                arcs.append((u, v))
                stack.append(v)
    return tuple(arcs)


def enumerate_labelled_trees(vertices: Iterable[int], orient_from: int) -> Iterator[tuple[tuple[int, int], ...]]:
    """Every labelled tree on ``vertices`` exactly once, as arcs directed away from ``orient_from``."""
    labels = sorted(vertices)
    if orient_from not in labels:
        raise PreconditionError("orient_from must be one of the vertices")
    n = len(labels)
    if n < 2:
        raise PreconditionError("need at least two vertices")
    for seq in itertools.product(range(n), repeat=n - 2):
        yield orient(prufer_decode(seq, labels), orient_from)


def is_potential_skeleton(root: int, arcs: Iterable[tuple[int, int]], terminals: Iterable[int]) -> bool:
    """Only terminals are leaves, terminals are leaves, and non-root internal vertices branch."""
    terminals = set(terminals)
    out = defaultdict(int)
    verts = {root}
    for u, v in arcs:
        out[u] += 1
        verts.add(v)
    for v in verts:
        if v in terminals:
            if out[v]:
                return False
        elif v != root and out[v] < 2:
            return False
    return root not in terminals and out[root] >= 1


def _arborescences(root: int, nodes: Sequence[int], arc_ok=None) -> Iterator[dict[int, int]]:
    """All parent maps making ``nodes`` an arborescence under ``root`` (nodes may hang anywhere)."""
    nodes = list(nodes)
    choices = [[p for p in [root, *nodes] if p != v and (arc_ok is None or arc_ok(p, v))] for v in nodes]
    for parents in itertools.product(*choices):
        par = dict(zip(nodes, parents))
        ok = True
        for v in nodes:
            seen = set()
            x = v
            while x != root:
                if x in seen:
                    ok = False
                    break
                seen.add(x)
                x = par[x]
            if not ok:
                break
        if ok:
            yield par


def _skeleton(root, arcs, terminals, junctions) -> PotentialSkeleton:
    children = defaultdict(list)
    for u, v in arcs:
        children[u].append(v)
    below = {}
    order = [root]
    for u in order:
        order.extend(children[u])
    for v in reversed(order):
        below[v] = (1 if v in terminals else 0) + sum(below[c] for c in children[v])
    return PotentialSkeleton(root, tuple(order), tuple(arcs), below, tuple(junctions))


def skeleton_trees(
    root: int,
    terminals: Sequence[int],
    junctions: Sequence[int],
    max_out: int | None = None,
    max_height: int | None = None,
    arc_ok: Callable[[int, int], bool] | None = None,
) -> Iterator[tuple[tuple[int, int], ...]]:
    """Rooted trees on root + terminals + junctions meeting the potential-skeleton shape.

    Builds the junction arborescence first, then hangs terminals so that every
    junction ends up with at least two children.  Yields the same set as
    filtering all labelled trees, in a fixed order.  ``max_out`` and
    ``max_height`` (in arcs) optionally restrict the shape, and ``arc_ok(u, v)``
    rejects skeleton arcs that cannot be realised (e.g. ``v`` unreachable from ``u``).
    """
    terminals = list(terminals)
    for par in _arborescences(root, junctions, arc_ok):
        depth = {root: 0}

        def d(v):
            if v not in depth:
                depth[v] = d(par[v]) + 1
            return depth[v]

        # a junction always has a terminal below it, hence the + 1
        if max_height is not None and any(d(j) + 1 > max_height for j in junctions):
            continue
        counts = {x: 0 for x in [root, *junctions]}
        for p in par.values():
            counts[p] += 1
        if max_out is not None and any(c > max_out for c in counts.values()):
            continue
        slots = [x for x in [root, *junctions] if max_height is None or d(x) + 1 <= max_height]
        need = {j: max(0, 2 - counts[j]) for j in junctions}
        deficit = [sum(need.values())]
        assign: list[int] = []

        def rec(i):
            if deficit[0] > len(terminals) - i:
                return
            if i == len(terminals):
                if counts[root] >= 1:
                    arcs = [(p, v) for v, p in par.items()] + [(p, t) for t, p in zip(terminals, assign)]
                    yield tuple(sorted(arcs))
                return
            for p in slots:
                if max_out is not None and counts[p] >= max_out:
                    continue
                if arc_ok is not None and not arc_ok(p, terminals[i]):
                    continue
                short = p != root and counts[p] < 2
                counts[p] += 1
                deficit[0] -= short
                assign.append(p)
                yield from rec(i + 1)
                assign.pop()
                deficit[0] += short
                counts[p] -= 1

        yield from rec(0)


def reachability(inst: Instance) -> Callable[[int, int], bool]:
    """``arc_ok`` predicate: ``v`` can be reached from ``u`` by a directed path."""
    reach = {}
    for v in inst.vertices:
        seen = {v}
        stack = [v]
        while stack:
            x = stack.pop()
            for a in inst.out_arcs[x]:
                if a.v not in seen:
                    seen.add(a.v)
                    stack.append(a.v)
        reach[v] = seen
    return lambda u, v: v in reach[u]


def junction_candidates(inst: Instance, terminal_subset: Iterable[int] | None = None) -> list[int]:
    excluded = set(inst.terminals) | {inst.root}
    if terminal_subset is not None:
        excluded |= set(terminal_subset)
    return [v for v in inst.vertices if inst.degree[v] >= 3 and v not in excluded]


def enumerate_potential_skeletons(
    inst: Instance,
    terminal_subset: Iterable[int] | None = None,
    max_junctions: int | None = None,
    max_out: int | None = None,
    max_height: int | None = None,
    arc_ok: Callable[[int, int], bool] | None = None,
) -> Iterator[PotentialSkeleton]:
    """Lazily yield every potential skeleton spanning ``terminal_subset`` (default: all terminals).

    Junctions are chosen among graph vertices of degree at least 3, at most
    ``K - 1`` of them; each combination is paired with every admissible tree.
    """
    terms = list(inst.terminals if terminal_subset is None else terminal_subset)
    if not terms:
        return
    limit = len(terms) - 1 if max_junctions is None else min(max_junctions, len(terms) - 1)
    cands = junction_candidates(inst, terms)
    tset = set(terms)
    for size in range(limit + 1):
        for junctions in itertools.combinations(cands, size):
            for arcs in skeleton_trees(inst.root, terms, junctions, max_out, max_height, arc_ok):
                yield _skeleton(inst.root, arcs, tset, junctions)
