"""Command-line interface.

Exit codes: 0 solved or feasible, 1 infeasible (or a failed check), 2 usage or
parse error, 3 the instance falls in a hard case and ``--algo oracle`` was not
given.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from fractions import Fraction
from pathlib import Path

from capsteiner.classify import KAPPA_MAX, ClassifierConfig, classify_instance
from capsteiner.core import CapSteinerError, check_feasible_tree, make_solution
from capsteiner.fixed_k import solve_dag_fixed_k, solve_uniform_fixed_k
from capsteiner.flow import solve_unit_capacity
from capsteiner.formats import (
    FormatError,
    arcs_from_json,
    format_length,
    parse_stp,
    parse_vdp,
    solution_to_dot,
    solution_to_json,
    write_bench_csv,
    write_stp,
)
from capsteiner.large_cap import (
    solve_cmin_k_minus_1,
    solve_cmin_k_minus_1_fixed_k,
    solve_dag_large_cap,
    solve_uniform_k_minus_kappa,
)
from capsteiner.oracle import OracleLimits, oracle_paths
from capsteiner.reductions import CnfFormula, gen_from_3sat3, gen_from_sat, gen_from_vdp, gen_from_vdp_squared, gen_from_vdp_uniform
from capsteiner.steiner import ApproxReport

log = logging.getLogger("capsteiner")

ALGORITHMS = (
    "auto", "unit-cap", "dag-fixed-k", "uniform-fixed-k", "uniform-kappa",
    "dag-large-cap", "cmin-k1-fixed", "cmin-k1", "oracle",
)

EXIT_OK, EXIT_INFEASIBLE, EXIT_USAGE, EXIT_REFUSED = 0, 1, 2, 3


class Refused(CapSteinerError):
    pass


def run_algorithm(inst, algo: str, mode: str = "optimize", kappa: int | None = None, max_n: int | None = None):
    """Run one named solver; returns ``(solution or None, guarantee or None)``.

    Exact solvers report guarantee 1; decision mode reports no guarantee.
    """
    decision = mode == "decision"
    exact = None if decision else Fraction(1)
    if algo == "unit-cap":
        return solve_unit_capacity(inst), exact
    if algo == "dag-fixed-k":
        return solve_dag_fixed_k(inst, mode=mode), exact
    if algo == "uniform-fixed-k":
        return solve_uniform_fixed_k(inst, mode=mode), exact
    if algo == "cmin-k1-fixed":
        return solve_cmin_k_minus_1_fixed_k(inst), exact
    if algo == "oracle":
        n = max(inst.n, 12) if max_n is None else max_n
        return oracle_paths(inst, OracleLimits(n, max(24, 3 * n)), feasibility_only=decision), exact
    if algo == "uniform-kappa":
        out = solve_uniform_k_minus_kappa(inst, kappa, mode=mode)
    elif algo == "dag-large-cap":
        out = solve_dag_large_cap(inst, kappa, mode=mode)
    elif algo == "cmin-k1":
        out = solve_cmin_k_minus_1(inst, mode=mode)
    else:
        raise ValueError(f"unknown algorithm {algo!r}")
    if isinstance(out, ApproxReport):
        return out.solution, out.guarantee
    return out, None


def _read(path: str) -> str:
    return sys.stdin.read() if path == "-" else Path(path).read_text()


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _solve(inst, algo, mode, kappa, max_n=None):
    label = classify_instance(inst, kappa, ClassifierConfig(kappa_max=max(KAPPA_MAX, kappa or 0)))
    chosen = label.chosen_algorithm if algo == "auto" else algo
    if chosen == "oracle-only":
        raise Refused(f"case {label.leaf_id} is {label.verdict}; rerun with --algo oracle to brute-force it")
    start = time.perf_counter()
    sol, guarantee = run_algorithm(inst, chosen, mode, kappa, max_n)
    elapsed = (time.perf_counter() - start) * 1000
    return label, chosen, sol, guarantee, elapsed


def cmd_solve(args) -> int:
    inst = parse_stp(_read(args.file))
    label, chosen, sol, guarantee, elapsed = _solve(inst, args.algo, args.mode, args.kappa)
    if args.json:
        print(solution_to_json(sol, label, {"elapsed_ms": None if args.no_timing else round(elapsed, 3)},
                               algorithm=chosen, guarantee=guarantee))
    elif sol is None:
        print(f"infeasible (case {label.leaf_id}, {chosen})")
    else:
        g = "n/a" if guarantee is None else format_length(guarantee)
        print(f"length {format_length(sol.total_length)} (case {label.leaf_id}, {chosen}, guarantee {g})")
        for u, v in sorted(sol.arcs):
            print(f"{u} {v}")
    if args.dot:
        _write(solution_to_dot(inst, sol), args.dot)
    return EXIT_OK if sol is not None else EXIT_INFEASIBLE


def cmd_check(args) -> int:
    inst = parse_stp(_read(args.file))
    try:
        arcs = arcs_from_json(_read(args.solution))
    except (ValueError, KeyError, TypeError) as exc:
        raise FormatError(f"bad solution file: {exc}") from None
    report = check_feasible_tree(inst, arcs)
    if report.ok:
        sol = make_solution(inst, arcs)
        print(f"ok: feasible tree of length {format_length(sol.total_length)}")
        return EXIT_OK
    print(f"infeasible: {report}")
    return EXIT_INFEASIBLE


def cmd_classify(args) -> int:
    import json

    inst = parse_stp(_read(args.file))
    label = classify_instance(inst, args.kappa)
    print(json.dumps(label.as_dict(), indent=2))
    return EXIT_OK


def cmd_gen(args) -> int:
    g = args.gadget
    if g in ("sat", "3sat3"):
        if not args.cnf:
            raise FormatError("--cnf FILE is required")
        f = CnfFormula.from_dimacs(_read(args.cnf))
        if g == "sat":
            inst = gen_from_sat(f, K=args.k or 3, c_min=args.cmin or 1, c_max=args.cmax or 2)
        else:
            inst = gen_from_3sat3(f, c=args.c or 2, kind=args.kind or "dag")
    else:
        if not args.vdp:
            raise FormatError("--vdp FILE is required")
        base = parse_vdp(_read(args.vdp))
        if g == "vdp":
            inst = gen_from_vdp(base)
        elif g == "vdp-uniform":
            inst = gen_from_vdp_uniform(base, args.k or 4, args.c or 2)
        else:
            inst = gen_from_vdp_squared(base)
    _write(write_stp(inst), args.out)
    return EXIT_OK


def cmd_oracle(args) -> int:
    inst = parse_stp(_read(args.file))
    label, chosen, sol, guarantee, elapsed = _solve(inst, "oracle", "optimize", None, args.max_n)
    print(solution_to_json(sol, label, {"elapsed_ms": round(elapsed, 3)}, algorithm="oracle", guarantee=guarantee))
    return EXIT_OK if sol is not None else EXIT_INFEASIBLE


def cmd_bench(args) -> int:
    rows = []
    for path in sorted(Path(args.dir).glob("*.stp")):
        row = {"instance": path.name}
        try:
            inst = parse_stp(path.read_text())
        except FormatError as exc:
            log.warning("skipping %s: %s", path.name, exc)
            row["status"] = "parse-error"
            rows.append(row)
            continue
        row.update(kind=inst.kind, n=inst.n, m=len(inst.edges), K=inst.K)
        try:
            label, chosen, sol, _, elapsed = _solve(inst, "auto", args.mode, None)
        except Refused:
            label = classify_instance(inst)
            row.update(leaf=label.leaf_id, algorithm="oracle-only", status="refused")
            rows.append(row)
            continue
        except CapSteinerError as exc:
            log.warning("%s: %s", path.name, exc)
            row["status"] = "error"
            rows.append(row)
            continue
        row.update(leaf=label.leaf_id, algorithm=chosen, elapsed_ms=round(elapsed, 3),
                   status="feasible" if sol else "infeasible",
                   total_length=None if sol is None else format_length(sol.total_length))
        rows.append(row)
    _write(write_bench_csv(rows), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="capsteiner", description="Capacitated rooted Steiner trees.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve an instance")
    s.add_argument("file")
    s.add_argument("--algo", choices=ALGORITHMS, default="auto")
    s.add_argument("--mode", choices=("decision", "optimize"), default="optimize")
    s.add_argument("--kappa", type=int)
    s.add_argument("--json", action="store_true")
    s.add_argument("--no-timing", action="store_true", help="write elapsed_ms as null (for reproducible output)")
    s.add_argument("--dot", metavar="FILE")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("check", help="check a JSON solution against an instance")
    c.add_argument("file")
    c.add_argument("solution")
    c.set_defaults(func=cmd_check)

    k = sub.add_parser("classify", help="print the case label")
    k.add_argument("file")
    k.add_argument("--kappa", type=int)
    k.set_defaults(func=cmd_classify)

    g = sub.add_parser("gen", help="generate a reduction instance")
    g.add_argument("gadget", choices=("vdp", "vdp-uniform", "vdp-squared", "sat", "3sat3"))
    g.add_argument("--cnf")
    g.add_argument("--vdp")
    g.add_argument("--k", type=int)
    g.add_argument("--c", type=int)
    g.add_argument("--cmin", type=int)
    g.add_argument("--cmax", type=int)
    g.add_argument("--kind", choices=("dag", "undirected"))
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    o = sub.add_parser("oracle", help="exhaustive optimum (small instances only)")
    o.add_argument("file")
    o.add_argument("--max-n", type=int)
    o.set_defaults(func=cmd_oracle)

    b = sub.add_parser("bench", help="solve every .stp file in a directory")
    b.add_argument("dir")
    b.add_argument("--out", required=True)
    b.add_argument("--mode", choices=("decision", "optimize"), default="optimize")
    b.set_defaults(func=cmd_bench)
    return p


def cli_dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except Refused as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except (FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapSteinerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(cli_dispatch())
