"""Text formats: CAPSTP instances, disjoint-paths inputs, JSON results, DOT, bench CSV.

CAPSTP grammar (one item per line, blank lines ignored)::

    CAPSTP 1
    SECTION Graph
    Kind digraph|dag|undirected
    Nodes n
    A u v length capacity      (digraph, dag)
    E u v length capacity      (undirected)
    SECTION Terminals
    Root r
    T t
    EOF

Lengths are integers or rationals ``p/q``.
"""

from __future__ import annotations

import csv
import io
import json
import re
from fractions import Fraction

from capsteiner.core import KINDS, Instance, SteinerSolution, validate_instance
from capsteiner.disjoint_paths import VdpInstance


class FormatError(ValueError):
    """Syntax or semantic error in an input file; carries line and column."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = "" if line is None else f"line {line}" + ("" if column is None else f", column {column}") + ": "
        super().__init__(where + message)
        self.line = line
        self.column = column


def format_length(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _parse_length(tok: str, line: int, col: int) -> Fraction:
    try:
        value = Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise FormatError(f"bad length {tok!r}", line, col) from None
    return value


def _parse_int(tok: str, what: str, line: int, col: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise FormatError(f"bad {what} {tok!r}", line, col) from None


def _lines(text: str):
    """Yield (line number, tokens, 1-based token columns) for non-blank lines."""
    for no, raw in enumerate(text.splitlines(), 1):
        found = list(re.finditer(r"\S+", raw))
        if found:
            yield no, [m.group() for m in found], [m.start() + 1 for m in found]


def _expect_header(it, header: str):
    try:
        no, toks, cols = next(it)
    except StopIteration:
        raise FormatError("empty file") from None
    if toks != header.split():
        raise FormatError(f"expected header {header!r}", no, cols[0])


def _graph_section(it, edge_width: int):
    """Shared Graph section; returns kind, n, edge rows and the next (line, tokens, cols)."""
    no, toks, cols = next(it, (None, None, None))
    if toks != ["SECTION", "Graph"]:
        raise FormatError("expected 'SECTION Graph'", no, cols[0] if cols else None)
    kind = n = None
    edges = []
    for no, toks, cols in it:
        key = toks[0]
        if key == "SECTION":
            if kind is None or n is None:
                raise FormatError("Graph section needs Kind and Nodes", no, cols[0])
            return kind, n, edges, (no, toks, cols)
        if key == "Kind":
            if len(toks) != 2 or toks[1] not in KINDS:
                raise FormatError(f"Kind must be one of {', '.join(KINDS)}", no, cols[-1])
            kind = toks[1]
        elif key == "Nodes":
            if len(toks) != 2:
                raise FormatError("expected 'Nodes n'", no, cols[0])
            n = _parse_int(toks[1], "node count", no, cols[1])
        elif key in ("A", "E"):
            if kind is None:
                raise FormatError("Kind must come before edges", no, cols[0])
            want = "E" if kind == "undirected" else "A"
            if key != want:
                raise FormatError(f"{kind} graphs use '{want}' lines", no, cols[0])
            if len(toks) != 1 + edge_width:
                raise FormatError(f"expected {edge_width} fields after {key}", no, cols[0])
            u = _parse_int(toks[1], "vertex", no, cols[1])
            v = _parse_int(toks[2], "vertex", no, cols[2])
            length = _parse_length(toks[3], no, cols[3])
            row = [u, v, length]
            if edge_width == 4:
                row.append(_parse_int(toks[4], "capacity", no, cols[4]))
            edges.append(tuple(row))
        else:
            raise FormatError(f"unexpected {key!r} in Graph section", no, cols[0])
    raise FormatError("unexpected end of file in Graph section")


def parse_stp(text: str, validate: bool = True) -> Instance:
    """Parse a CAPSTP file; ``validate`` also runs the semantic checks."""
    it = _lines(text)
    _expect_header(it, "CAPSTP 1")
    kind, n, edges, (no, toks, cols) = _graph_section(it, 4)
    if toks != ["SECTION", "Terminals"]:
        raise FormatError("expected 'SECTION Terminals'", no, cols[0])
    root = None
    terminals = []
    done = False
    for no, toks, cols in it:
        if done:
            raise FormatError("content after EOF", no, cols[0])
        key = toks[0]
        if key == "Root" and len(toks) == 2:
            if root is not None:
                raise FormatError("duplicate Root", no, cols[0])
            root = _parse_int(toks[1], "root", no, cols[1])
        elif key == "T" and len(toks) == 2:
            terminals.append(_parse_int(toks[1], "terminal", no, cols[1]))
        elif toks == ["EOF"]:
            done = True
        else:
            raise FormatError(f"unexpected {' '.join(toks)!r} in Terminals section", no, cols[0])
    if not done:
        raise FormatError("missing EOF")
    if root is None:
        raise FormatError("missing Root")
    inst = Instance.build(kind, n, edges, root, terminals)
    if validate:
        report = validate_instance(inst)
        if not report.ok:
            raise FormatError("; ".join(v.detail for v in report.violations))
    return inst


def write_stp(inst: Instance) -> str:
    tag = "E" if inst.kind == "undirected" else "A"
    out = ["CAPSTP 1", "SECTION Graph", f"Kind {inst.kind}", f"Nodes {inst.n}"]
    out += [f"{tag} {e.u} {e.v} {format_length(e.length)} {e.capacity}" for e in inst.edges]
    out += ["SECTION Terminals", f"Root {inst.root}"]
    out += [f"T {t}" for t in inst.terminals]
    out.append("EOF")
    return "\n".join(out) + "\n"


def parse_vdp(text: str) -> VdpInstance:
    """Disjoint-paths input: header ``CAPVDP 1``, a Graph section without capacities, then
    ``SECTION Pairs`` with ``P s t`` lines and ``EOF``."""
    it = _lines(text)
    _expect_header(it, "CAPVDP 1")
    kind, n, edges, (no, toks, cols) = _graph_section(it, 3)
    if toks != ["SECTION", "Pairs"]:
        raise FormatError("expected 'SECTION Pairs'", no, cols[0])
    pairs = []
    done = False
    for no, toks, cols in it:
        if done:
            raise FormatError("content after EOF", no, cols[0])
        if toks[0] == "P" and len(toks) == 3:
            pairs.append((_parse_int(toks[1], "vertex", no, cols[1]), _parse_int(toks[2], "vertex", no, cols[2])))
        elif toks == ["EOF"]:
            done = True
        else:
            raise FormatError(f"unexpected {' '.join(toks)!r} in Pairs section", no, cols[0])
    if not done:
        raise FormatError("missing EOF")
    ends = [x for p in pairs for x in p]
    if len(set(ends)) != len(ends):
        raise FormatError("source-sink pairs must be disjoint")
    for x in ends:
        if not 1 <= x <= n:
            raise FormatError(f"pair endpoint {x} out of range")
    return VdpInstance.build(kind, n, edges, pairs)


def write_vdp(v: VdpInstance) -> str:
    tag = "E" if v.kind == "undirected" else "A"
    out = ["CAPVDP 1", "SECTION Graph", f"Kind {v.kind}", f"Nodes {v.n}"]
    out += [f"{tag} {a} {b} {format_length(length)}" for a, b, length in v.edges]
    out.append("SECTION Pairs")
    out += [f"P {s} {t}" for s, t in v.pairs]
    out.append("EOF")
    return "\n".join(out) + "\n"


def solution_to_json(sol: SteinerSolution | None, label=None, stats: dict | None = None, *,
                     algorithm: str | None = None, guarantee=None) -> str:
    """One JSON object with a fixed key order.

    ``label`` is a ``CaseLabel`` (or None); ``stats`` may hold ``elapsed_ms``.
    ``guarantee`` is a number (int when integral) or None.
    """
    stats = stats or {}
    if guarantee is not None:
        g = Fraction(guarantee)
        guarantee = g.numerator if g.denominator == 1 else float(g)
    obj = {
        "feasible": sol is not None,
        "total_length": None if sol is None else format_length(sol.total_length),
        "arcs": [] if sol is None else [list(a) for a in sorted(sol.arcs)],
        "algorithm": algorithm if algorithm is not None else (label.chosen_algorithm if label else None),
        "case_leaf": label.leaf_id if label else None,
        "guarantee": guarantee if sol is not None else None,
        "elapsed_ms": stats.get("elapsed_ms"),
    }
    return json.dumps(obj, indent=2)


def arcs_from_json(text: str) -> list[tuple[int, int]]:
    obj = json.loads(text)
    return [(int(u), int(v)) for u, v in obj.get("arcs", [])]


def solution_to_dot(inst: Instance, sol: SteinerSolution | None) -> str:
    """Graphviz drawing: tree arcs bold and labelled with load/capacity."""
    used = set() if sol is None else set(sol.arcs)
    loads = {} if sol is None else sol.load
    out = ["digraph capsteiner {"]
    out.append(f'  {inst.root} [shape=doublecircle];')
    for t in inst.terminals:
        out.append(f"  {t} [shape=box];")
    seen = set()
    for a in inst.arcs:
        key = (a.u, a.v)
        if key in used:
            out.append(f'  {a.u} -> {a.v} [penwidth=3, label="{loads.get(key, 0)}/{a.capacity}"];')
        elif inst.kind != "undirected" or a.edge not in seen:
            style = ", dir=none" if inst.kind == "undirected" else ""
            out.append(f'  {a.u} -> {a.v} [color=gray{style}, label="{format_length(a.length)}"];')
        seen.add(a.edge)
    out.append("}")
    return "\n".join(out) + "\n"


BENCH_FIELDS = ("instance", "kind", "n", "m", "K", "leaf", "algorithm", "status", "total_length", "elapsed_ms")


def write_bench_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=BENCH_FIELDS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: ("" if row.get(k) is None else row[k]) for k in BENCH_FIELDS})
    return buf.getvalue()


def read_bench_csv(text: str) -> list[dict]:
    ints = {"n", "m", "K", "leaf"}
    rows = []
    for raw in csv.DictReader(io.StringIO(text)):
        row = {}
        for k in BENCH_FIELDS:
            v = raw[k]
            if v == "":
                row[k] = None
            elif k in ints:
                row[k] = int(v)
            elif k == "total_length":
                row[k] = Fraction(v)
            elif k == "elapsed_ms":
                row[k] = float(v)
            else:
                row[k] = v
        rows.append(row)
    return rows
