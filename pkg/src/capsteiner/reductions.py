"""Instance generators for the hardness gadgets, plus round-trip checks.

Every generator maps a disjoint-paths or satisfiability input to a
capacitated Steiner tree instance whose answer is tied to the original one:
equal optimum for the disjoint-paths gadgets, feasibility iff satisfiable for
the formula gadgets.  New edges always have length 0.
"""

from __future__ import annotations

import itertools
from collections import Counter, defaultdict
from dataclasses import dataclass, field

from capsteiner.core import (
    Instance,
    PreconditionError,
    SteinerSolution,
    check_feasible_tree,
    make_solution,
    validate_instance,
)
from capsteiner.disjoint_paths import VdpInstance
from capsteiner.graphs import prune_tree
from capsteiner.oracle import OracleLimits, oracle_mlcst, oracle_paths, oracle_vdisj


@dataclass(frozen=True)
class CnfFormula:
    """Clauses are tuples of nonzero ints, DIMACS style: ``-3`` is the negation of x3."""

    variable_count: int
    clauses: tuple[tuple[int, ...], ...]

    @classmethod
    def build(cls, variable_count: int, clauses) -> CnfFormula:
        f = cls(int(variable_count), tuple(tuple(int(x) for x in c) for c in clauses))
        f.check()
        return f

    def check(self) -> None:
        if self.variable_count < 1:
            raise PreconditionError("a formula needs at least one variable")
        for j, c in enumerate(self.clauses):
            if not c:
                raise PreconditionError(f"clause {j + 1} is empty")
            for lit in c:
                if lit == 0 or abs(lit) > self.variable_count:
                    raise PreconditionError(f"clause {j + 1}: literal {lit} out of range")

    @property
    def nu(self) -> int:
        return len(self.clauses)

    def literal_counts(self) -> Counter:
        # literals repeated inside one clause count once
        return Counter(lit for c in self.clauses for lit in set(c))

    def check_3sat3(self) -> None:
        per_var: Counter = Counter()
        for j, c in enumerate(self.clauses):
            if len(set(c)) > 3:
                raise PreconditionError(f"clause {j + 1} has more than 3 literals")
            for x in {abs(lit) for lit in c}:
                per_var[x] += 1
        for x, k in per_var.items():
            if k > 3:
                raise PreconditionError(f"variable {x} occurs in {k} clauses (at most 3 allowed)")
        for lit, k in self.literal_counts().items():
            if k > 2:
                raise PreconditionError(f"literal {lit} occurs in {k} clauses (at most 2 allowed)")

    def evaluate(self, assignment) -> bool:
        """``assignment[i - 1]`` is the value of x_i."""
        return all(any((lit > 0) == bool(assignment[abs(lit) - 1]) for lit in c) for c in self.clauses)

    def satisfying_assignment(self) -> tuple[bool, ...] | None:
        for bits in itertools.product((True, False), repeat=self.variable_count):
            if self.evaluate(bits):
                return bits
        return None

    def normalized(self) -> tuple[CnfFormula, tuple[bool, ...]]:
        """Swap x_i and its negation wherever the negation occurs more often.

        Returns the new formula and, per variable, whether it was flipped.
        """
        counts = self.literal_counts()
        flips = tuple(counts[-x] > counts[x] for x in range(1, self.variable_count + 1))
        clauses = tuple(tuple(-lit if flips[abs(lit) - 1] else lit for lit in c) for c in self.clauses)
        return CnfFormula(self.variable_count, clauses), flips

    @classmethod
    def from_dimacs(cls, text: str) -> CnfFormula:
        nvars = None
        clauses = []
        current: list[int] = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("c") or line.startswith("%"):
                continue
            if line.startswith("p"):
                parts = line.split()
                if len(parts) != 4 or parts[1] != "cnf":
                    raise ValueError(f"line {lineno}: bad problem line {raw!r}")
                nvars = int(parts[2])
                continue
            for tok in line.split():
                try:
                    lit = int(tok)
                except ValueError:
                    raise ValueError(f"line {lineno}: bad literal {tok!r}") from None
                if lit == 0:
                    clauses.append(tuple(current))
                    current = []
                else:
                    current.append(lit)
        if current:
            clauses.append(tuple(current))
        if nvars is None:
            raise ValueError("missing 'p cnf' line")
        return cls.build(nvars, clauses)

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.variable_count} {self.nu}"]
        lines += [" ".join(map(str, c)) + " 0" for c in self.clauses]
        return "\n".join(lines) + "\n"


@dataclass
class _Builder:
    """Allocates vertex ids by name and collects edges."""

    ids: dict = field(default_factory=dict)
    edges: list = field(default_factory=list)

    def __call__(self, *name) -> int:
        if name not in self.ids:
            self.ids[name] = len(self.ids) + 1
        return self.ids[name]

    def edge(self, a, b, capacity, length=0):
        self.edges.append((a, b, length, capacity))


# --- disjoint paths gadgets ---------------------------------------------------


def _copy_base(v: VdpInstance, capacity: int):
    return [(a, b, length, capacity) for a, b, length in v.edges]


def gen_from_vdp(v: VdpInstance) -> Instance:
    """Root arcs of capacity 1..p onto the sources, i terminals below the i-th sink.

    Base vertices keep their ids; the root is ``n + 1`` and terminals follow.
    Optimum lengths coincide with the disjoint-paths optimum.
    """
    p = v.p
    if p < 2:
        raise PreconditionError("need at least two source-sink pairs")
    r = v.n + 1
    edges = _copy_base(v, p)
    terminals = []
    nxt = r + 1
    for i, (s, t) in enumerate(v.pairs, 1):
        edges.append((r, s, 0, i))
        for _ in range(i):
            edges.append((t, nxt, 0, 1))
            terminals.append(nxt)
            nxt += 1
    return Instance.build(v.kind, nxt - 1, edges, r, terminals)


def gen_from_vdp_uniform(v: VdpInstance, K: int, c: int) -> Instance:
    """Two pairs, K terminals, uniform capacity c with 2 <= c <= K - 2."""
    if v.p != 2:
        raise PreconditionError("this gadget takes exactly two source-sink pairs")
    if K < 4 or not 2 <= c <= K - 2:
        raise PreconditionError(f"need K >= 4 and 2 <= c <= K - 2, got K={K}, c={c}")
    (s1, t1), (s2, t2) = v.pairs
    r, hub = v.n + 1, v.n + 2
    term = {i: v.n + 2 + i for i in range(1, K + 1)}
    edges = _copy_base(v, c)
    edges += [(r, hub, 0, c), (r, s2, 0, c), (hub, s1, 0, c), (hub, term[1], 0, c), (t1, term[2], 0, c)]
    edges += [(t2, term[i], 0, c) for i in range(3, c + 3)]
    edges += [(r, term[i], 0, c) for i in range(c + 3, K + 1)]
    return Instance.build(v.kind, v.n + 2 + K, edges, r, term.values())


def gen_from_vdp_squared(v: VdpInstance) -> Instance:
    """p pairs, p^2 terminals, uniform capacity p."""
    p = v.p
    if p < 2:
        raise PreconditionError("need at least two source-sink pairs")
    r = v.n + 1
    hub = {i: v.n + 1 + i for i in range(1, p)}
    nxt = v.n + p + 1
    term = {}
    for i in range(1, p + 1):
        for j in range(1, p + 1):
            term[i, j] = nxt
            nxt += 1
    src = {i: s for i, (s, _) in enumerate(v.pairs, 1)}
    snk = {i: t for i, (_, t) in enumerate(v.pairs, 1)}
    edges = _copy_base(v, p)
    edges.append((r, src[p], 0, p))
    for i in range(1, p):
        edges += [(r, hub[i], 0, p), (hub[i], src[i], 0, p)]
    for (i, j), t in term.items():
        edges.append((snk[i] if j <= i else hub[i], t, 0, p))
    return Instance.build(v.kind, nxt - 1, edges, r, term.values())


# --- satisfiability gadgets --------------------------------------------------


@dataclass(frozen=True)
class SatGadget:
    instance: Instance
    names: dict  # name tuple -> vertex id
    formula: CnfFormula  # after literal normalization
    flips: tuple[bool, ...]
    used: tuple[int, ...]  # variables that got a gadget, in chain order
    occurrence: dict  # (clause index, literal) -> occurrence number (1-based)


def _sat_gadget(f: CnfFormula, K: int, c_min: int, c_max: int, terminal_capacity: int | None) -> SatGadget:
    f.check()
    if K < 3 or not 1 <= c_min <= K - 2 or c_max <= c_min:
        raise PreconditionError(f"need K >= 3, 1 <= c_min <= K - 2 and c_max > c_min (got {K}, {c_min}, {c_max})")
    if not f.clauses:
        raise PreconditionError("the formula needs at least one clause")
    g, flips = f.normalized()
    clauses = [tuple(dict.fromkeys(c)) for c in g.clauses]
    counts = Counter(lit for c in clauses for lit in c)
    # a variable in no clause cannot matter, and its two paths would coincide
    used = tuple(x for x in range(1, g.variable_count + 1) if counts[x] or counts[-x])
    lo, hi = c_min, c_min + 1
    tcap = c_min if terminal_capacity is None else terminal_capacity
    b = _Builder()
    r = b("r")
    for x in used:
        o, ob = counts[x], counts[-x]
        pos = [b("v", x, k) for k in range(2 * o + 2)]
        for k in range(2 * o + 1):
            b.edge(pos[k], pos[k + 1], hi if k % 2 else lo)
        neg = [pos[0]] + [b("vb", x, k) for k in range(1, 2 * ob + 1)] + [pos[-1]]
        for k in range(len(neg) - 1):
            b.edge(neg[k], neg[k + 1], hi if k % 2 else lo)
    for a, c in zip(used, used[1:]):
        b.edge(b("v", a, 2 * counts[a] + 1), b("v", c, 0), lo)
    seen: Counter = Counter()
    occurrence = {}
    for j, c in enumerate(clauses, 1):
        u1, u2 = b("u", j, 1), b("u", j, 2)
        for lit in c:
            seen[lit] += 1
            ell = seen[lit]
            occurrence[j, lit] = ell
            tag = "v" if lit > 0 else "vb"
            b.edge(u1, b(tag, abs(lit), 2 * ell - 1), hi)
            b.edge(b(tag, abs(lit), 2 * ell), u2, hi)
        if j < len(clauses):
            b.edge(u2, b("u", j + 1, 1), hi)
    b.edge(r, b("v", used[0], 0), lo)
    b.edge(r, b("u", 1, 1), hi)
    last = b("v", used[-1], 2 * counts[used[-1]] + 1)
    b.edge(last, b("t", 1), c_max)
    for k in range(c_min + 1):
        b.edge(b("u", len(clauses), 2), b("t", 2 + k), tcap)
    for k in range(K - c_min - 2):
        b.edge(r, b("t", c_min + 3 + k), tcap)
    terminals = [b.ids[("t", k)] for k in range(1, K + 1)]
    inst = Instance.build("undirected", len(b.ids), b.edges, r, terminals)
    return SatGadget(inst, dict(b.ids), CnfFormula(g.variable_count, tuple(clauses)), flips, used, occurrence)


def gen_from_sat(f: CnfFormula, K: int = 3, c_min: int = 1, c_max: int = 2, terminal_capacity: int | None = None) -> Instance:
    """Undirected instance with K terminals that is feasible iff ``f`` is satisfiable.

    Edges hanging terminals get ``terminal_capacity`` (default ``c_min``),
    except the one at the end of the variable chain which gets ``c_max``.
    """
    return _sat_gadget(f, K, c_min, c_max, terminal_capacity).instance


def sat_witness_tree(f: CnfFormula, assignment, K: int = 3, c_min: int = 1, c_max: int = 2,
                     terminal_capacity: int | None = None) -> SteinerSolution:
    """The feasible tree of ``gen_from_sat(f, ...)`` built from a satisfying assignment."""
    if not f.evaluate(assignment):
        raise PreconditionError("assignment does not satisfy the formula")
    gd = _sat_gadget(f, K, c_min, c_max, terminal_capacity)
    v = gd.names
    value = {x: bool(assignment[x - 1]) != gd.flips[x - 1] for x in range(1, f.variable_count + 1)}
    counts = Counter(lit for c in gd.formula.clauses for lit in c)
    # first path: root -> variable chain -> t1, through the path of the false literal
    walk = [v["r",]]
    for x in gd.used:
        if value[x]:
            walk += [v["v", x, 0]] + [v["vb", x, k] for k in range(1, 2 * counts[-x] + 1)]
            walk.append(v["v", x, 2 * counts[x] + 1])
        else:
            walk += [v["v", x, k] for k in range(2 * counts[x] + 2)]
    walk.append(v["t", 1])
    arcs = list(zip(walk, walk[1:]))
    # second path: root -> clause chain, one true literal per clause
    walk = [v["r",]]
    for j, c in enumerate(gd.formula.clauses, 1):
        lit = next(lit for lit in c if value[abs(lit)] == (lit > 0))
        ell = gd.occurrence[j, lit]
        tag = "v" if lit > 0 else "vb"
        walk += [v["u", j, 1], v[tag, abs(lit), 2 * ell - 1], v[tag, abs(lit), 2 * ell], v["u", j, 2]]
    arcs += list(zip(walk, walk[1:]))
    end = walk[-1]
    arcs += [(end, v["t", 2 + k]) for k in range(c_min + 1)]
    arcs += [(v["r",], v["t", c_min + 3 + k]) for k in range(K - c_min - 2)]
    return make_solution(gd.instance, arcs)


def sat_assignment_from_tree(f: CnfFormula, sol: SteinerSolution, K: int = 3, c_min: int = 1, c_max: int = 2,
                             terminal_capacity: int | None = None) -> tuple[bool, ...]:
    """Read the assignment back: x is false exactly when the path to t1 runs along x's own path."""
    gd = _sat_gadget(f, K, c_min, c_max, terminal_capacity)
    parent = {b: a for a, b in sol.arcs}
    on_first = set()
    x = gd.names["t", 1]
    while x in parent:
        on_first.add(x)
        x = parent[x]
    out = []
    for i in range(1, f.variable_count + 1):
        key = ("v", i, 1)
        val = not (key in gd.names and gd.names[key] in on_first and i in gd.used)
        out.append(val != gd.flips[i - 1])
    return tuple(out)


@dataclass(frozen=True)
class ThreeSatGadget:
    instance: Instance
    pos: dict  # variable -> v_i
    neg: dict  # variable -> negated v_i
    hub: dict  # variable -> s_i
    var_terminals: dict  # variable -> tuple of c terminals
    clause_terminals: tuple[int, ...]


def _three_sat_gadget(f: CnfFormula, c: int, kind: str) -> ThreeSatGadget:
    f.check()
    f.check_3sat3()
    if c < 2:
        raise PreconditionError("capacity must be at least 2")
    if kind not in ("dag", "undirected"):
        raise PreconditionError(f"kind must be dag or undirected, got {kind!r}")
    b = _Builder()
    r = b("r")
    pos, neg, hub, tv = {}, {}, {}, {}
    for x in range(1, f.variable_count + 1):
        pos[x], neg[x], hub[x] = b("v", x), b("vb", x), b("s", x)
        tv[x] = tuple(b("TV", x, k) for k in range(1, c + 1))
    tc = tuple(b("TC", j) for j in range(1, f.nu + 1))
    for x in range(1, f.variable_count + 1):
        b.edge(r, pos[x], c)
        b.edge(r, neg[x], c)
        b.edge(pos[x], hub[x], c)
        b.edge(neg[x], hub[x], c)
        for t in tv[x]:
            b.edge(hub[x], t, c)
    for j, clause in enumerate(f.clauses):
        for lit in dict.fromkeys(clause):
            b.edge(pos[lit] if lit > 0 else neg[-lit], tc[j], c)
    terminals = [t for x in tv for t in tv[x]] + list(tc)
    inst = Instance.build(kind, len(b.ids), b.edges, r, terminals)
    return ThreeSatGadget(inst, pos, neg, hub, tv, tc)


def gen_from_3sat3(f: CnfFormula, c: int = 2, kind: str = "dag") -> Instance:
    """Uniform-capacity instance, feasible iff the 3-SAT-3 formula ``f`` is satisfiable."""
    return _three_sat_gadget(f, c, kind).instance


def three_sat_witness_tree(f: CnfFormula, assignment, c: int = 2, kind: str = "dag") -> SteinerSolution:
    if not f.evaluate(assignment):
        raise PreconditionError("assignment does not satisfy the formula")
    gd = _three_sat_gadget(f, c, kind)
    r = gd.instance.root
    arcs = []
    for x in gd.pos:
        top = gd.neg[x] if assignment[x - 1] else gd.pos[x]
        arcs += [(r, gd.pos[x]), (r, gd.neg[x]), (top, gd.hub[x])]
        arcs += [(gd.hub[x], t) for t in gd.var_terminals[x]]
    for j, clause in enumerate(f.clauses):
        lit = next(lit for lit in clause if bool(assignment[abs(lit) - 1]) == (lit > 0))
        arcs.append((gd.pos[lit] if lit > 0 else gd.neg[-lit], gd.clause_terminals[j]))
    return make_solution(gd.instance, prune_tree(arcs, gd.instance.terminals))


def three_sat_assignment_from_tree(f: CnfFormula, sol: SteinerSolution, c: int = 2, kind: str = "dag") -> tuple[bool, ...]:
    """x is true exactly when its c variable terminals hang below the negated vertex."""
    gd = _three_sat_gadget(f, c, kind)
    parent = {b: a for a, b in sol.arcs}
    return tuple(parent.get(gd.hub[x]) == gd.neg[x] for x in range(1, f.variable_count + 1))


# --- round trips --------------------------------------------------------------


@dataclass(frozen=True)
class RoundTripReport:
    kind: str
    ok: bool
    base_answer: object  # optimum length, feasibility, or a satisfying assignment
    image_answer: object
    witness: object = None
    detail: str = ""


ROUND_TRIP_KINDS = ("vdp", "vdp-uniform", "vdp-squared", "sat", "3sat3")


def verify_roundtrip(kind: str, base, image: Instance | None = None, /, *, lim: OracleLimits | None = None,
                     **params) -> RoundTripReport:
    """Check the equivalence a gadget promises, using the exhaustive oracles.

    ``params`` are the generator parameters (``K``, ``c``, ``c_min``, and
    ``kind`` for the 3-SAT3 gadget, hence the positional-only arguments).
    ``image`` defaults to a freshly generated one.  Oracles raise
    ``LimitExceeded`` when the base or image is too large for ``lim``.
    """
    if kind not in ROUND_TRIP_KINDS:
        raise PreconditionError(f"unknown round-trip kind {kind!r}")
    gens = {
        "vdp": lambda: gen_from_vdp(base),
        "vdp-uniform": lambda: gen_from_vdp_uniform(base, params.get("K", 4), params.get("c", 2)),
        "vdp-squared": lambda: gen_from_vdp_squared(base),
        "sat": lambda: gen_from_sat(base, **params),
        "3sat3": lambda: gen_from_3sat3(base, **params),
    }
    if image is None:
        image = gens[kind]()
    vr = validate_instance(image)
    lim = lim or OracleLimits(max(12, image.n), max(24, len(image.edges)))
    if kind.startswith("vdp"):
        got = oracle_vdisj(base, OracleLimits(max(12, base.n), max(24, len(base.edges))))
        sol = oracle_mlcst(image, lim) if vr.ok else None
        base_val = None if got is None else got[1]
        img_val = None if sol is None else sol.total_length
        if kind == "vdp":
            ok = base_val == img_val
        else:
            ok = (base_val is None) == (img_val is None)
        return RoundTripReport(kind, ok, base_val, img_val, sol)
    sat = base.satisfying_assignment()
    # the gadgets are large and sparse; the path-growing oracle is the one that copes
    sol = oracle_paths(image, lim, feasibility_only=True) if vr.ok else None
    ok = (sat is None) == (sol is None)
    detail = ""
    if ok and sol is not None:
        if kind == "sat":
            read = sat_assignment_from_tree(base, sol, **params)
            built = sat_witness_tree(base, sat, **params)
        else:
            read = three_sat_assignment_from_tree(base, sol, **params)
            built = three_sat_witness_tree(base, sat, **params)
        if not base.evaluate(read):
            ok, detail = False, f"assignment read from the image tree {read} does not satisfy the formula"
        rep = check_feasible_tree(image, built)
        if not rep.ok:
            ok, detail = False, f"witness tree infeasible: {rep}"
    return RoundTripReport(kind, ok, sat, sol is not None, sol, detail)


# --- exhaustive families ------------------------------------------------------


def _clause_pool(nvars: int, max_len: int) -> list[tuple[int, ...]]:
    pool = []
    for size in range(1, max_len + 1):
        for vs in itertools.combinations(range(1, nvars + 1), size):
            for signs in itertools.product((1, -1), repeat=size):
                pool.append(tuple(s * x for s, x in zip(signs, vs)))
    return pool


def _canonical(nvars: int, clauses) -> tuple:
    # smallest form under variable renaming and sign flips, clause order ignored
    best = None
    for perm in itertools.permutations(range(1, nvars + 1)):
        for signs in itertools.product((1, -1), repeat=nvars):
            form = tuple(sorted(tuple(sorted(signs[abs(l) - 1] * perm[abs(l) - 1] * (1 if l > 0 else -1) for l in c))
                                for c in clauses))
            if best is None or form < best:
                best = form
    return best


def all_formulas(max_vars: int, max_clauses: int, max_len: int = 3, three_sat3: bool = False,
                 up_to_symmetry: bool = False):
    """Every formula with up to ``max_vars`` variables and ``max_clauses`` clauses.

    Clauses are sets of literals on distinct variables, taken as a multiset.
    With ``up_to_symmetry`` one representative per class under variable
    renaming and negation is kept.
    """
    seen = set()
    for nvars in range(1, max_vars + 1):
        pool = _clause_pool(nvars, max_len)
        for nu in range(1, max_clauses + 1):
            for combo in itertools.combinations_with_replacement(pool, nu):
                f = CnfFormula(nvars, combo)
                if three_sat3:
                    try:
                        f.check_3sat3()
                    except PreconditionError:
                        continue
                if up_to_symmetry:
                    key = (nvars, _canonical(nvars, combo))
                    if key in seen:
                        continue
                    seen.add(key)
                yield f


def random_vdp(seed: int, kind: str = "undirected", n: int = 6, p: int = 2, density: float = 0.5,
               lengths=(1, 5)) -> VdpInstance:
    """A random base with ``p`` disjoint pairs in which every sink is reachable from its source."""
    import random

    rng = random.Random(seed)
    while True:
        edges = []
        for a, b in itertools.permutations(range(1, n + 1), 2):
            if kind == "undirected" and a > b:
                continue
            if kind == "dag" and a > b:
                continue
            if rng.random() < density:
                edges.append((a, b, rng.randint(*lengths)))
        ends = rng.sample(range(1, n + 1), 2 * p)
        pairs = [tuple(sorted(ends[2 * i:2 * i + 2])) if kind == "dag" else (ends[2 * i], ends[2 * i + 1])
                 for i in range(p)]
        adj = defaultdict(set)
        for a, b, _ in edges:
            adj[a].add(b)
            if kind == "undirected":
                adj[b].add(a)
        if all(_reaches(adj, s, t) for s, t in pairs):
            return VdpInstance.build(kind, n, edges, pairs)


def _reaches(adj, s, t) -> bool:
    seen, stack = {s}, [s]
    while stack:
        u = stack.pop()
        if u == t:
            return True
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return False

