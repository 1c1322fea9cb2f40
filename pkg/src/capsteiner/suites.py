"""Seeded random instance families for tests and benchmarks."""

from __future__ import annotations

import random
from typing import Callable

from capsteiner.core import Instance, validate_instance


def random_instance(
    seed: int,
    kind: str = "digraph",
    n: int = 8,
    K: int = 3,
    extra: int | None = None,
    capacity: Callable[[random.Random], int] | int = 1,
    lengths: tuple[int, int] = (1, 9),
) -> Instance:
    """A valid instance: a random spanning arborescence from the root plus ``extra`` random edges.

    DAG arcs always go from lower to higher id, the root is vertex 1 and the
    terminals are a random K-subset of the other vertices.
    """
    rng = random.Random(seed)
    extra = rng.randint(n // 3, n) if extra is None else extra
    cap = capacity if callable(capacity) else (lambda _r: capacity)
    pairs = set()
    edges = []

    def add(u, v):
        key = (u, v) if kind != "undirected" else (min(u, v), max(u, v))
        if u == v or key in pairs or (v, u) in pairs:
            return False
        pairs.add(key)
        edges.append((u, v, rng.randint(*lengths), cap(rng)))
        return True

    for v in range(2, n + 1):
        add(rng.randint(1, v - 1), v)
    tries = 0
    added = 0
    while added < extra and tries < 20 * (extra + 1):
        tries += 1
        u, v = rng.sample(range(1, n + 1), 2)
        if kind == "dag" and u > v:
            u, v = v, u
        if v == 1 and kind != "undirected":
            continue
        added += add(u, v)
    terminals = rng.sample(range(2, n + 1), K)
    inst = Instance.build(kind, n, edges, 1, terminals)
    assert validate_instance(inst).ok
    return inst


def suite(kind: str, count: int, seed: int = 0, **kw) -> list[Instance]:
    """``count`` instances with varied size; keyword arguments may be callables of the rng."""
    out = []
    rng = random.Random(f"{kind}-{seed}")
    for i in range(count):
        params = {k: (v(rng) if callable(v) and k != "capacity" else v) for k, v in kw.items()}
        out.append(random_instance(rng.randrange(1 << 30), kind, **params))
    return out
