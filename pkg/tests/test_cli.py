import json
from pathlib import Path

import pytest

from capsteiner.cli import EXIT_INFEASIBLE, EXIT_OK, EXIT_REFUSED, EXIT_USAGE, cli_dispatch, run_algorithm
from capsteiner.formats import parse_stp, read_bench_csv
from capsteiner.oracle import oracle_mlcst

FIXTURES = Path(__file__).parent / "fixtures"


def fixture(leaf):
    return str(FIXTURES / f"leaf{leaf:02d}.stp")


def test_solve_text_and_json(capsys):
    assert cli_dispatch(["solve", fixture(2)]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("length 7 (case 2, cmin-k1-fixed, guarantee 1)")
    assert cli_dispatch(["solve", fixture(2), "--json", "--no-timing"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out) == json.loads((FIXTURES / "leaf02.json").read_text())


def test_solve_infeasible_and_refused(capsys):
    assert cli_dispatch(["solve", fixture(1)]) == EXIT_INFEASIBLE
    assert "infeasible" in capsys.readouterr().out
    assert cli_dispatch(["solve", fixture(6)]) == EXIT_REFUSED
    assert "--algo oracle" in capsys.readouterr().err


def test_refused_case_runs_with_oracle(capsys):
    inst = parse_stp(Path(fixture(6)).read_text())
    assert cli_dispatch(["solve", fixture(6), "--algo", "oracle", "--json"]) in (EXIT_OK, EXIT_INFEASIBLE)
    obj = json.loads(capsys.readouterr().out)
    want = oracle_mlcst(inst)
    assert obj["feasible"] == (want is not None)
    if want is not None:
        assert obj["total_length"] == str(want.total_length)


def test_usage_errors(tmp_path, capsys):
    assert cli_dispatch([]) == EXIT_USAGE
    assert cli_dispatch(["solve", str(tmp_path / "missing.stp")]) == EXIT_USAGE
    bad = tmp_path / "bad.stp"
    bad.write_text("CAPSTP 1\nSECTION Graph\nKind dag\nNodes x\n")
    assert cli_dispatch(["solve", str(bad)]) == EXIT_USAGE
    assert "line 4, column 7" in capsys.readouterr().err
    assert cli_dispatch(["solve", fixture(2), "--algo", "nope"]) == EXIT_USAGE


def test_check(tmp_path, capsys):
    good = tmp_path / "sol.json"
    assert cli_dispatch(["solve", fixture(2), "--json"]) == EXIT_OK
    good.write_text(capsys.readouterr().out)
    assert cli_dispatch(["check", fixture(2), str(good)]) == EXIT_OK
    assert capsys.readouterr().out.startswith("ok: feasible tree of length 7")
    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps({"arcs": [[1, 5]]}))
    assert cli_dispatch(["check", fixture(2), str(wrong)]) == EXIT_INFEASIBLE
    junk = tmp_path / "junk.json"
    junk.write_text("{")
    assert cli_dispatch(["check", fixture(2), str(junk)]) == EXIT_USAGE


def test_classify(capsys):
    assert cli_dispatch(["classify", fixture(12)]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["leaf_id"] == 12
    assert cli_dispatch(["classify", fixture(12), "--kappa", "7"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["leaf_id"] == 13


def test_dot_output(tmp_path):
    dot = tmp_path / "tree.dot"
    assert cli_dispatch(["solve", fixture(2), "--dot", str(dot)]) == EXIT_OK
    assert dot.read_text().startswith("digraph capsteiner {")


@pytest.mark.parametrize("gadget, args", [
    ("sat", ["--k", "3"]),
    ("3sat3", ["--kind", "undirected"]),
    ("vdp", []),
    ("vdp-uniform", ["--k", "4", "--c", "2"]),
    ("vdp-squared", []),
])
def test_gen(tmp_path, gadget, args):
    cnf = tmp_path / "f.cnf"
    cnf.write_text("p cnf 3 2\n1 -2 0\n2 3 0\n")
    vdp = tmp_path / "b.vdp"
    vdp.write_text("CAPVDP 1\nSECTION Graph\nKind undirected\nNodes 4\nE 1 2 1\nE 3 4 1\nSECTION Pairs\nP 1 2\nP 3 4\nEOF\n")
    out = tmp_path / "g.stp"
    source = ["--cnf", str(cnf)] if "sat" in gadget else ["--vdp", str(vdp)]
    assert cli_dispatch(["gen", gadget, *source, *args, "--out", str(out)]) == EXIT_OK
    assert parse_stp(out.read_text()).K >= 2


def test_gen_needs_input():
    assert cli_dispatch(["gen", "sat"]) == EXIT_USAGE
    assert cli_dispatch(["gen", "vdp"]) == EXIT_USAGE


def test_oracle_command(capsys):
    assert cli_dispatch(["oracle", fixture(2)]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["total_length"] == "7"
    assert cli_dispatch(["oracle", fixture(3), "--max-n", "3"]) == EXIT_USAGE


def test_bench(tmp_path):
    for leaf in (1, 2, 6):
        (tmp_path / f"leaf{leaf:02d}.stp").write_text(Path(fixture(leaf)).read_text())
    (tmp_path / "broken.stp").write_text("nope\n")
    out = tmp_path / "bench.csv"
    assert cli_dispatch(["bench", str(tmp_path), "--out", str(out)]) == EXIT_OK
    rows = {r["instance"]: r for r in read_bench_csv(out.read_text())}
    assert rows["broken.stp"]["status"] == "parse-error"
    assert rows["leaf01.stp"]["status"] == "infeasible"
    assert rows["leaf02.stp"]["status"] == "feasible" and rows["leaf02.stp"]["total_length"] == 7
    assert rows["leaf06.stp"]["status"] == "refused" and rows["leaf06.stp"]["leaf"] == 6


def test_run_algorithm_rejects_unknown_names():
    inst = parse_stp(Path(fixture(2)).read_text())
    with pytest.raises(ValueError):
        run_algorithm(inst, "magic")
    sol, guarantee = run_algorithm(inst, "oracle", mode="decision")
    assert sol is not None and guarantee is None
