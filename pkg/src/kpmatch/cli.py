"""Command-line interface: ``kpmatch <command> ...``.

Exit codes: 0 success, 1 a check failed, 2 usage or parse error, 3 a stage
of a pipeline (or the solver budget) failed.
"""

from __future__ import annotations

import argparse
import sys
import time
from typing import Optional, Sequence

from . import absorbing, constructions, extremal, solvers
from .core import Bipartition, Params, Vertex, codegrees, frac, partite_min_d_degree
from .errors import BudgetExhausted, KPMatchError, SelectionFailed, StageFailed
from .io import Check, RunReport, parse_instance, parse_matching, render_instance
from .verify import SUITES, run_verify_suite

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_STAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}")


def _vertices(text: str) -> list[Vertex]:
    """``p:x,p:x,...`` into vertices."""
    out = []
    for item in text.split(","):
        part, sep, index = item.partition(":")
        if not sep:
            raise UsageError(f"vertex {item!r} must be written part:index")
        out.append(Vertex(int(part), int(index)))
    return out


def _subsets(text: str, k: int) -> list[list[int]]:
    """``0,1;2;`` into k index lists (one per part, separated by ';')."""
    rows = text.split(";")
    if len(rows) != k:
        raise UsageError(f"expected {k} ';'-separated index lists")
    return [_ints(r) for r in rows]


def _load(path: str):
    if path == "-":
        text = sys.stdin.read()
    else:
        with open(path, "r", encoding="ascii", newline="") as fh:
            text = fh.read()
    return parse_instance(text)


def _edges(M) -> list[list[int]]:
    return [list(e) for e in M.edges]


def _emit(report: RunReport, fmt: str, out=None) -> None:
    out = out or sys.stdout
    out.write(report.to_json() if fmt == "json" else report.to_text())


# ---------------------------------------------------------------------------
# commands


def cmd_gen(args, params: Params) -> int:
    k = args.k
    bip = None
    if args.family == "complete":
        H = constructions.complete(k, args.n)
    elif args.family == "space":
        H = constructions.space_barrier(k, args.n, _ints(args.a))
    elif args.family in ("even", "odd"):
        if args.A is not None:
            bip = Bipartition((args.n,) * k, _subsets(args.A, k))
        else:
            bip = Bipartition.prefix((args.n,) * k, _ints(args.a))
        H = constructions.parity_family(k, args.n, bip, args.family)
    elif args.family == "random":
        H = constructions.random_instance(k, args.n, frac(args.p), args.seed)
    else:
        H, bip = _load(args.input)
        H = constructions.perturb(H, args.add, args.remove, args.seed)
    text = render_instance(H, bip)
    if args.output:
        with open(args.output, "w", encoding="ascii", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_solve(args, params: Params) -> int:
    H, _ = _load(args.instance)
    report = RunReport("solve", params.as_dict(), args.seed)
    start = time.perf_counter()
    try:
        rep = solvers.max_matching(H, args.budget)
    except BudgetExhausted as err:
        report.data = {"error": str(err), "best": _edges(err.best) if err.best is not None else None,
                       "nodes": err.nodes}
        report.checks.append(Check("budget", False))
        _emit(report, args.format)
        return EXIT_STAGE
    report.timings["solve"] = time.perf_counter() - start
    report.data = {"nu": rep.size, "optimal": rep.optimal, "nodes": rep.nodes_explored,
                   "upper_bound": rep.upper_bound, "matching": _edges(rep.matching)}
    report.checks.append(Check("solved", rep.optimal, rep.size, rep.upper_bound))
    _emit(report, args.format)
    return EXIT_OK if rep.optimal else EXIT_STAGE


def cmd_check(args, params: Params) -> int:
    H, _ = _load(args.instance)
    report = RunReport("check", params.as_dict(), args.seed)
    a = codegrees(H)
    data: dict = {"k": H.k, "sizes": list(H.sizes), "edges": len(H), "codegrees": list(a)}
    if H.k >= 2 and min(H.sizes) > 0:
        data["min_codegree"] = partite_min_d_degree(H, H.k - 1)
        first, second = solvers.fact_targets(H)
        M = solvers.greedy_fact_matching(H)
        data["fact_targets"] = [first, second]
        data["greedy_size"] = len(M)
        report.checks.append(Check("fact-bounds", len(M) >= max(first, second), len(M), max(first, second)))
    if H.equal_parts and H.n > 0:
        conds = {"daykin_haggkvist": solvers.check_condition(H, "daykin_haggkvist")}
        for i in range(H.k):
            conds[f"pikhurko_{i}"] = solvers.check_condition(H, ("pikhurko", (i,)))
        data["conditions"] = {name: {key: (list(v) if isinstance(v, tuple) else v) for key, v in c.items()}
                              for name, c in conds.items()}
    if args.matching:
        with open(args.matching, "r", encoding="ascii") as fh:
            M = parse_matching(fh.read(), H.k)
        ok = M.is_valid(H)
        report.checks.append(Check("matching-valid", ok, len(M), len(M)))
        data["matching_size"] = len(M)
    report.data = data
    _emit(report, args.format)
    return EXIT_OK if report.passed else EXIT_CHECK


def cmd_absorb(args, params: Params) -> int:
    H, _ = _load(args.instance)
    report = RunReport("absorb", params.as_dict(), args.seed)
    data: dict = {}
    if args.S and args.e:
        ok, cert = absorbing.is_absorbing_edge(H, _vertices(args.S), _ints(args.e))
        data["absorbing_edge"] = {"holds": ok, "certificate": [list(cert.e1), list(cert.e2)] if cert else None}
    if args.S and args.T:
        data["perfect_absorbing"] = absorbing.is_perfect_absorbing(H, _vertices(args.S), _vertices(args.T))
    if args.reach:
        u, v = _vertices(args.reach)
        rec = absorbing.reach_count(H, u, v, args.i, params.beta)
        data["reach"] = {"u": list(u), "v": list(v), "i": args.i, "count": rec.count,
                         "threshold": str(rec.threshold), "reachable": rec.reachable}
    if args.closed is not None:
        cp = absorbing.closed_partition(H, args.closed, params.beta, args.i, params.c)
        data["closed_partition"] = {"part": cp.part, "classes": [sorted(c) for c in cp.classes],
                                    "residue": sorted(cp.residue),
                                    "beta_prime": [str(b) for b in cp.beta_prime],
                                    "closed_at_beta": list(cp.closed_at_beta)}
    if args.family:
        try:
            fam = (absorbing.absorbing_matching_I(H, params).report if args.family == "edges"
                   else absorbing.perfect_absorbing_family(H, 0, params))
        except SelectionFailed as err:
            fam = err.report
        data["family"] = fam.as_dict() if fam is not None else None
        report.checks.append(Check("family", bool(fam and fam.success), len(fam.members) if fam else 0))
    if not data:
        raise UsageError("nothing to do: give --S with --e or --T, --reach, --closed or --family")
    report.data = data
    _emit(report, args.format)
    return EXIT_OK if report.passed else EXIT_CHECK


def cmd_classify(args, params: Params) -> int:
    H, bip = _load(args.instance)
    report = RunReport("classify", params.as_dict(), args.seed)
    s = extremal.check_s_extremal(H, params.gamma if args.s_eps is None else frac(args.s_eps))
    d_eps = params.epsilon if args.d_eps is None else frac(args.d_eps)
    d = extremal.check_d_extremal(H, d_eps, bip, params=params)
    report.data = {"s_extremal": s.as_dict() if s else None, "d_extremal": d.as_dict() if d else None,
                   "codegrees": list(codegrees(H))}
    report.checks.append(Check("s-witness-verifies", s is None or s.verify(H)))
    report.checks.append(Check("d-witness-verifies", d is None or d.verify(H)))
    _emit(report, args.format)
    return EXIT_OK if report.passed else EXIT_CHECK


def cmd_match(args, params: Params) -> int:
    H, _ = _load(args.instance)
    report = RunReport("match", params.as_dict(), args.seed)
    start = time.perf_counter()
    try:
        M, tr = extremal.main_matching(H, params, exact_fallback=not args.no_fallback)
    except StageFailed as err:
        tr = getattr(err, "transcript", None)
        report.data = {"stage": err.stage, "error": str(err),
                       "transcript": tr.as_dict() if tr is not None and args.transcript else None}
        report.checks.append(Check("stage", False))
        _emit(report, args.format)
        return EXIT_STAGE
    report.timings["match"] = time.perf_counter() - start
    goal = min(H.n - 1, sum(codegrees(H)))
    report.data = {"size": len(M), "goal": goal, "route": list(tr.route), "matching": _edges(M),
                   "fallbacks": len(tr.fallbacks)}
    if args.transcript:
        report.data["transcript"] = tr.as_dict()
    report.checks.append(Check("valid", M.is_valid(H), len(M), len(M)))
    report.checks.append(Check("size-goal", len(M) >= goal, len(M), goal))
    _emit(report, args.format)
    return EXIT_OK if report.passed else EXIT_CHECK


def cmd_verify(args, params: Params) -> int:
    report = run_verify_suite(args.suite, params, args.seed)
    _emit(report, args.format)
    return EXIT_OK if report.passed else EXIT_CHECK


# ---------------------------------------------------------------------------
# parser


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    def default(value):
        return argparse.SUPPRESS if suppress else value

    flags = argparse.ArgumentParser(add_help=False)
    flags.add_argument("--seed", type=int, default=default(0), help="64-bit seed for every random choice")
    flags.add_argument("--budget", type=int, default=default(None), help="solver node budget")
    flags.add_argument("--params", action="append", default=default([]), metavar="KEY=VAL",
                       help="override a named constant (repeatable)")
    flags.add_argument("--format", choices=("text", "json"), default=default("text"))
    return flags


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kpmatch", parents=[_global_flags(False)],
                                     description="Matchings in k-partite k-uniform hypergraphs.")
    # Global flags may also follow the subcommand; there they carry no defaults
    # so they never overwrite a value given before it.
    common = _global_flags(True)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", parents=[common], help="write a generated instance")
    gen.add_argument("family", choices=("complete", "space", "even", "odd", "random", "perturb"))
    gen.add_argument("--k", type=int, default=3)
    gen.add_argument("--n", type=int, default=4)
    gen.add_argument("--a", default="0,0,0", help="comma-separated sizes (space barrier or prefix A_i)")
    gen.add_argument("--A", default=None, help="explicit A_i lists, ';'-separated per part")
    gen.add_argument("--p", default="1/2", help="edge probability (rational)")
    gen.add_argument("--input", default="-", help="instance to perturb")
    gen.add_argument("--add", type=int, default=0)
    gen.add_argument("--remove", type=int, default=0)
    gen.add_argument("-o", "--output", default=None)
    gen.set_defaults(func=cmd_gen)

    solve = sub.add_parser("solve", parents=[common], help="exact matching number")
    solve.add_argument("instance")
    solve.set_defaults(func=cmd_solve)

    check = sub.add_parser("check", parents=[common], help="codegrees, greedy bounds, dense conditions")
    check.add_argument("instance")
    check.add_argument("--matching", default=None, help="matching file to validate")
    check.set_defaults(func=cmd_check)

    ab = sub.add_parser("absorb", parents=[common], help="absorbing predicates and families")
    ab.add_argument("instance")
    ab.add_argument("--S", default=None, help="vertex set as part:index,...")
    ab.add_argument("--e", default=None, help="edge as comma-separated indices")
    ab.add_argument("--T", default=None, help="balanced set as part:index,...")
    ab.add_argument("--reach", default=None, help="two vertices of one part")
    ab.add_argument("--closed", type=int, default=None, help="part to split into closed classes")
    ab.add_argument("--i", type=int, default=1, help="swap size multiplier")
    ab.add_argument("--family", choices=("edges", "sets"), default=None)
    ab.set_defaults(func=cmd_absorb)

    cl = sub.add_parser("classify", parents=[common], help="extremality witnesses")
    cl.add_argument("instance")
    cl.add_argument("--s-eps", default=None)
    cl.add_argument("--d-eps", default=None)
    cl.set_defaults(func=cmd_classify)

    ma = sub.add_parser("match", parents=[common], help="run the matching dispatcher")
    ma.add_argument("instance")
    ma.add_argument("--transcript", action="store_true", help="include the stage transcript")
    ma.add_argument("--no-fallback", action="store_true", help="disable exact-solver fallbacks")
    ma.set_defaults(func=cmd_match)

    ve = sub.add_parser("verify", parents=[common], help="run a verification suite")
    ve.add_argument("suite", choices=tuple(SUITES))
    ve.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        params = Params.from_pairs(args.params, Params(seed=args.seed, node_budget=args.budget
                                                       if args.budget is not None else Params().node_budget))
        return args.func(args, params)
    except (UsageError, OSError, ValueError) as err:
        print(f"kpmatch: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except StageFailed as err:
        print(f"kpmatch: stage {err.stage} failed: {err}", file=sys.stderr)
        return EXIT_STAGE
    except KPMatchError as err:
        print(f"kpmatch: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
