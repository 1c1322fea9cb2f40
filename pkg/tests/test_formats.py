import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from capsteiner.core import Instance, make_solution
from capsteiner.disjoint_paths import VdpInstance
from capsteiner.formats import (
    FormatError,
    arcs_from_json,
    parse_stp,
    parse_vdp,
    read_bench_csv,
    solution_to_dot,
    solution_to_json,
    write_bench_csv,
    write_stp,
    write_vdp,
)
from capsteiner.reductions import random_vdp
from capsteiner.suites import random_instance

GOOD = """CAPSTP 1
SECTION Graph
Kind digraph
Nodes 3
A 1 2 3/2 2
A 2 3 1 1
SECTION Terminals
Root 1
T 2
T 3
EOF
"""


def test_parse_good_file():
    inst = parse_stp(GOOD)
    assert inst.kind == "digraph" and inst.n == 3 and inst.terminals == (2, 3)
    assert inst.edges[0].length == Fraction(3, 2)
    assert write_stp(inst) == GOOD


@pytest.mark.parametrize("text, line, column", [
    ("", None, None),
    ("CAPSTP 2\n", 1, 1),
    (GOOD.replace("Kind digraph", "Kind tree"), 3, 6),
    (GOOD.replace("A 1 2 3/2 2", "A 1 2 x 2"), 5, 7),
    (GOOD.replace("A 1 2 3/2 2", "A 1 2 3/0 2"), 5, 7),
    (GOOD.replace("A 2 3 1 1", "E 2 3 1 1"), 6, 1),
    (GOOD.replace("A 2 3 1 1", "A 2 3 1"), 6, 1),
    (GOOD.replace("A 2 3 1 1", "A 2 3 1 one"), 6, 9),
    (GOOD.replace("T 3", "T 3\nRoot 2"), 11, 1),
    (GOOD.replace("T 3", "X 3"), 10, 1),
    (GOOD.replace("EOF\n", ""), None, None),
    (GOOD + "T 4\n", 12, 1),
])
def test_errors_carry_positions(text, line, column):
    with pytest.raises(FormatError) as info:
        parse_stp(text)
    assert (info.value.line, info.value.column) == (line, column)


def test_semantic_errors_can_be_skipped():
    bad = GOOD.replace("T 3", "T 1")
    with pytest.raises(FormatError):
        parse_stp(bad)
    assert parse_stp(bad, validate=False).terminals == (2, 1)


@given(st.integers(0, 10**6), st.sampled_from(["digraph", "dag", "undirected"]))
def test_stp_round_trip(seed, kind):
    inst = random_instance(seed, kind, n=9, K=3, capacity=lambda r: r.randint(1, 3), lengths=(0, 20))
    assert parse_stp(write_stp(inst)) == inst


@given(st.integers(0, 10**6), st.sampled_from(["digraph", "dag", "undirected"]))
def test_vdp_round_trip(seed, kind):
    v = random_vdp(seed, kind, n=7, p=2)
    assert parse_vdp(write_vdp(v)) == v


def test_vdp_errors():
    text = write_vdp(VdpInstance.build("digraph", 4, [(1, 2, 1), (3, 4, 1)], [(1, 2), (3, 4)]))
    with pytest.raises(FormatError):
        parse_vdp(text.replace("P 3 4", "P 2 4"))
    with pytest.raises(FormatError):
        parse_vdp(text.replace("P 3 4", "P 3 9"))
    with pytest.raises(FormatError):
        parse_vdp(text.replace("SECTION Pairs", "SECTION Terminals"))


def test_json_shape():
    inst = parse_stp(GOOD)
    sol = make_solution(inst, [(2, 3), (1, 2)])
    obj = json.loads(solution_to_json(sol, algorithm="oracle", guarantee=Fraction(1), stats={"elapsed_ms": 1.5}))
    assert list(obj) == ["feasible", "total_length", "arcs", "algorithm", "case_leaf", "guarantee", "elapsed_ms"]
    assert obj["total_length"] == "5/2" and obj["arcs"] == [[1, 2], [2, 3]] and obj["guarantee"] == 1
    assert arcs_from_json(solution_to_json(sol)) == [(1, 2), (2, 3)]
    empty = json.loads(solution_to_json(None, guarantee=2))
    assert empty["feasible"] is False and empty["guarantee"] is None and empty["arcs"] == []
    assert json.loads(solution_to_json(sol, guarantee=Fraction(3, 2)))["guarantee"] == 1.5


def test_dot_marks_tree_arcs():
    inst = Instance.build("undirected", 3, [(1, 2, 1, 2), (2, 3, 1, 1), (1, 3, 4, 1)], 1, [2, 3])
    dot = solution_to_dot(inst, make_solution(inst, [(1, 2), (2, 3)]))
    assert '1 -> 2 [penwidth=3, label="2/2"]' in dot
    assert "1 -> 3 [color=gray, dir=none" in dot
    assert dot.count("->") == 3


def test_bench_csv_round_trip():
    rows = [
        {"instance": "a.stp", "kind": "dag", "n": 5, "m": 7, "K": 2, "leaf": 11, "algorithm": "dag-fixed-k",
         "status": "feasible", "total_length": "7/2", "elapsed_ms": 0.25},
        {"instance": "b.stp", "status": "parse-error"},
    ]
    back = read_bench_csv(write_bench_csv(rows))
    assert back[0]["total_length"] == Fraction(7, 2) and back[0]["n"] == 5 and back[0]["elapsed_ms"] == 0.25
    assert back[1]["status"] == "parse-error" and back[1]["kind"] is None
