"""Command-line entry point: ``egraphkit simplify|prove|rewrite|dot|bench``.

Exit codes: 0 success or proved, 1 inconclusive proof or failed bench case,
2 bad input (unparseable rules or terms, bad flags), 3 no finite term to
extract, 4 file-system errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import DEFAULT_REPS, format_table, run_bench, select
from .dot import to_dot
from .egraph import EGraph
from .evaluate import EvalError
from .extract import COST_FUNCTIONS, NoFiniteTerm
from .matcher import Chain, Fixpoint, FixpointDiverged, Postwalk, Prewalk
from .pattern import RuleError, RuleKind, Theory, TheoryError, parse_theory
from .saturation import SaturationParams, SchedulerKind, prove_equal, saturate
from .simplify import simplify_full
from .term import ParseError, TermError, parse_sexpr, print_sexpr
from .theories import BUILTIN, theory_text

EXIT_OK, EXIT_INCONCLUSIVE, EXIT_INPUT, EXIT_EXTRACT, EXIT_IO = 0, 1, 2, 3, 4

_defaults = SaturationParams()


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# --- input helpers ------------------------------------------------------------


def load_rules(spec: str | None) -> Theory:
    """Theory from a file path, or ``builtin:NAME`` for a shipped rule file."""
    if spec is None:
        return Theory([])
    if spec.startswith("builtin:"):
        name = spec.split(":", 1)[1]
        if name not in BUILTIN:
            raise CliError(EXIT_INPUT, f"unknown built-in theory {name!r}; choose from {', '.join(BUILTIN)}")
        label, text = spec, theory_text(name)
    else:
        label = spec
        try:
            text = Path(spec).read_text(encoding="utf-8")
        except OSError as e:
            raise CliError(EXIT_IO, f"{spec}: cannot read rules ({e.strerror or e})") from e
    try:
        return parse_theory(text)
    except TheoryError as e:
        raise CliError(EXIT_INPUT, f"{label}:{e.lineno}: {e.cause}") from e
    except (RuleError, TermError) as e:
        raise CliError(EXIT_INPUT, f"{label}: {e}") from e


def parse_term(text: str, flag: str):
    try:
        return parse_sexpr(text)
    except ParseError as e:
        raise CliError(EXIT_INPUT, f"{flag}: {e}") from e
    except TermError as e:
        raise CliError(EXIT_INPUT, f"{flag}: {e}") from e


def make_params(args) -> SaturationParams:
    try:
        return SaturationParams(
            timeout=args.iters,
            node_limit=args.node_limit,
            time_limit=args.time_limit,
            scheduler=SchedulerKind(args.scheduler),
        )
    except ValueError as e:
        raise CliError(EXIT_INPUT, str(e)) from e


def emit_json(obj, path: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=False) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as e:
        raise CliError(EXIT_IO, f"{path}: cannot write ({e.strerror or e})") from e


# --- subcommands ----------------------------------------------------------------


def cmd_simplify(args) -> int:
    th = load_rules(args.rules)
    ex = parse_term(args.expr, "--expr")
    params = make_params(args)
    try:
        r = simplify_full(ex, th, params, COST_FUNCTIONS[args.cost])
    except NoFiniteTerm as e:
        raise CliError(EXIT_EXTRACT, str(e)) from e
    out = print_sexpr(r.term)
    doc = {"input": print_sexpr(ex), "output": out, "cost": r.cost, "report": r.report.to_dict()}
    if args.json == "-":
        emit_json(doc, None)
        return EXIT_OK
    print(out)
    if args.json is not None:
        emit_json(doc, args.json)
    return EXIT_OK


def cmd_prove(args) -> int:
    th = load_rules(args.rules)
    lhs = parse_term(args.lhs, "--lhs")
    rhs = parse_term(args.rhs, "--rhs")
    ok, report = prove_equal(lhs, rhs, th, make_params(args))
    verdict = "proved" if ok else "inconclusive"
    doc = {"lhs": print_sexpr(lhs), "rhs": print_sexpr(rhs), "result": verdict, "report": report.to_dict()}
    if args.json == "-":
        emit_json(doc, None)
    else:
        reason = report.stop_reason.value if report.stop_reason else "-"
        n = report.iterations
        print(f"{verdict} ({reason} after {n} iteration{'' if n == 1 else 's'})")
        if args.json is not None:
            emit_json(doc, args.json)
    return EXIT_OK if ok else EXIT_INCONCLUSIVE


def cmd_rewrite(args) -> int:
    th = load_rules(args.rules)
    ex = parse_term(args.expr, "--expr")
    rules = th.rules
    if any(r.kind is RuleKind.EQUATIONAL for r in rules):
        if not args.skip_equational:
            names = ", ".join(r.name for r in rules if r.kind is RuleKind.EQUATIONAL)
            raise CliError(
                EXIT_INPUT,
                f"equational rules are not callable ({names}); pass --skip-equational to drop them",
            )
        rules = [r for r in rules if r.kind is not RuleKind.EQUATIONAL]
    walk = Prewalk if args.strategy == "prewalk" else Postwalk
    rw = walk(Chain(rules))
    if args.fixpoint:
        rw = Fixpoint(rw)
    try:
        out = rw(ex)
    except FixpointDiverged as e:
        raise CliError(EXIT_INCONCLUSIVE, str(e)) from e
    except EvalError as e:
        raise CliError(EXIT_INPUT, f"evaluation failed: {e}") from e
    print(print_sexpr(ex if out is None else out))
    return EXIT_OK


def cmd_dot(args) -> int:
    th = load_rules(args.rules) if args.rules else None
    ex = parse_term(args.expr, "--expr")
    params = make_params(args)
    g = EGraph(node_limit=params.node_limit)
    g.root = g.add_term(ex)
    if th is not None:
        saturate(g, th, params)
    text = to_dot(g)
    if args.out in (None, "-"):
        sys.stdout.write(text)
        return EXIT_OK
    try:
        Path(args.out).write_text(text, encoding="utf-8")
    except OSError as e:
        raise CliError(EXIT_IO, f"{args.out}: cannot write ({e.strerror or e})") from e
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        select(args.suite)
    except ValueError as e:
        raise CliError(EXIT_INPUT, str(e)) from e
    if args.reps < 1:
        raise CliError(EXIT_INPUT, "--reps must be at least 1")
    results = run_bench(args.suite, args.reps)
    records = [r.to_dict() for r in results]
    if args.json == "-":
        emit_json(records, None)
    else:
        sys.stdout.write(format_table(results))
        if args.json is not None:
            emit_json(records, args.json)
    if args.figure:
        from .plotting import plot_bench

        try:
            plot_bench(results, args.figure)
        except OSError as e:
            raise CliError(EXIT_IO, f"{args.figure}: cannot write figure ({e.strerror or e})") from e
    failed = [r.case for r in results if not r.ok]
    if failed:
        print(f"FAILED: {', '.join(failed)}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    return EXIT_OK


# --- argument parsing ---------------------------------------------------------------


def _add_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--iters", type=int, default=_defaults.timeout, help="iteration cap (default %(default)s)")
    p.add_argument("--node-limit", type=int, default=_defaults.node_limit, help="e-node cap (default %(default)s)")
    p.add_argument("--time-limit", type=float, default=None, help="wall-clock cap in milliseconds")
    p.add_argument(
        "--scheduler",
        choices=[k.value for k in SchedulerKind],
        default=_defaults.scheduler.value,
    )


def _add_json(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--json",
        nargs="?",
        const="-",
        default=None,
        metavar="PATH",
        help="write a JSON report to PATH, or to stdout instead of the plain output",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="egraphkit", description="Term rewriting and equality saturation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simplify", help="saturate an expression and extract the cheapest equivalent")
    p.add_argument("--rules", required=True, help="rule file, or builtin:NAME")
    p.add_argument("--expr", required=True)
    p.add_argument("--cost", choices=sorted(COST_FUNCTIONS), default="astsize")
    _add_params(p)
    _add_json(p)
    p.set_defaults(func=cmd_simplify)

    p = sub.add_parser("prove", help="check whether two expressions are equal under a theory")
    p.add_argument("--rules", required=True)
    p.add_argument("--lhs", required=True)
    p.add_argument("--rhs", required=True)
    _add_params(p)
    _add_json(p)
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("rewrite", help="classical rewriting with directed and dynamic rules")
    p.add_argument("--rules", required=True)
    p.add_argument("--expr", required=True)
    p.add_argument("--strategy", choices=["prewalk", "postwalk"], default="postwalk")
    p.add_argument("--fixpoint", action="store_true", help="repeat the walk until nothing changes")
    p.add_argument("--skip-equational", action="store_true", help="drop == rules instead of failing")
    p.set_defaults(func=cmd_rewrite)

    p = sub.add_parser("dot", help="write the e-graph of an expression as GraphViz DOT")
    p.add_argument("--rules", default=None, help="saturate with these rules first")
    p.add_argument("--expr", required=True)
    p.add_argument("--out", default=None, help="output path (default stdout)")
    _add_params(p)
    p.set_defaults(func=cmd_dot)

    p = sub.add_parser("bench", help="run the built-in benchmark suite")
    p.add_argument("--suite", default="all", help="all, a suite name, or case names, comma separated")
    p.add_argument("--reps", type=int, default=DEFAULT_REPS)
    p.add_argument("--figure", default=None, metavar="PATH", help="also save a bar chart of the medians")
    _add_json(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(f"egraphkit: {e}", file=sys.stderr)
        return e.code


if __name__ == "__main__":
    sys.exit(main())
