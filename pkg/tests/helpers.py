"""Seeded instance families shared by the test modules."""

from __future__ import annotations

import random

from capsteiner.core import Instance
from capsteiner.disjoint_paths import LabVdpInstance
from capsteiner.oracle import OracleLimits
from capsteiner.suites import random_instance

ROOMY = OracleLimits(24, 60)


def family(tag: str, count: int, kind: str, n=(5, 10), K=(2, 4), capacity=1, lengths=(1, 9)):
    """``count`` instances; ``capacity(rng, K)`` returns an int or a per-edge callable."""
    rng = random.Random(tag)
    out = []
    for _ in range(count):
        nn = rng.randint(*n)
        kk = rng.randint(K[0], min(K[1], nn - 1))
        cap = capacity(rng, kk) if callable(capacity) else capacity
        out.append(random_instance(rng.randrange(1 << 30), kind, nn, kk, capacity=cap, lengths=lengths))
    return out


def uniform_between(lo, hi):
    return lambda r: r.randint(lo, hi)


def force_min_capacity(inst: Instance, c: int) -> Instance:
    """Set the first edge's capacity to ``c`` so that ``c_min`` is exactly ``c``."""
    first = inst.edges[0]
    edges = [(first.u, first.v, first.length, c)] + [tuple(e) for e in inst.edges[1:]]
    return inst.replace(edges=edges)


def random_labvdp(seed: int, n_max: int = 12, p_max: int = 3, k: int = 3) -> LabVdpInstance:
    rng = random.Random(seed)
    n = rng.randint(4, n_max)
    p = rng.randint(1, min(p_max, n // 2))
    edges = []
    for a in range(1, n + 1):
        for b in range(a + 1, n + 1):
            if rng.random() < 0.5:
                edges.append((a, b, rng.randint(0, 6), rng.randint(1, k)))
    ends = sorted(rng.sample(range(1, n + 1), 2 * p))
    sinks = ends[p:]
    rng.shuffle(sinks)
    pairs = list(zip(ends[:p], sinks))
    sets = [frozenset(range(rng.choice([1, 1, 2, k]), k + 1)) for _ in range(p)]
    return LabVdpInstance.build("dag", n, edges, pairs, sets, k=k)
