import dataclasses
import json
import os
import subprocess
import sys

import pytest

from egraphkit import bench
from egraphkit.cli import main
from egraphkit.saturation import SaturationParams, prove_equal
from egraphkit.simplify import simplify
from egraphkit.term import parse_sexpr, print_sexpr
from egraphkit.theories import load_theory

ZEROES = "(+ (+ (+ 0 (* (* 1 x) 0)) (* y 0)) y)"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_simplify(capsys):
    code, out, _ = run(capsys, "simplify", "--rules", "builtin:maths", "--expr", ZEROES)
    assert (code, out) == (0, "y\n")


def test_simplify_matches_library(capsys):
    for expr in ("(* (+ a 0) 1)", "(+ (* 2 0) b)", "(* 1 (* 1 q))"):
        _, out, _ = run(capsys, "simplify", "--rules", "builtin:maths", "--expr", expr)
        assert out.strip() == print_sexpr(simplify(parse_sexpr(expr), load_theory("maths")))


def test_simplify_json_to_stdout_and_file(capsys, tmp_path):
    code, out, _ = run(capsys, "simplify", "--rules", "builtin:maths", "--expr", "(+ x 0)", "--json")
    doc = json.loads(out)
    assert code == 0 and doc["output"] == "x" and doc["report"]["stop_reason"] == "saturated"
    path = tmp_path / "r.json"
    code, out, _ = run(capsys, "simplify", "--rules", "builtin:maths", "--expr", "(+ x 0)", "--json", str(path))
    assert out == "x\n" and json.loads(path.read_text())["cost"] == 1


def test_prove_exit_codes(capsys):
    code, out, _ = run(capsys, "prove", "--rules", "builtin:prop", "--lhs", "(not (or p q))", "--rhs", "(and (not p) (not q))")
    assert code == 0 and out.startswith("proved (goal after 1 iteration)")
    code, out, _ = run(capsys, "prove", "--rules", "builtin:prop", "--lhs", "(impl p q)", "--rhs", "(impl q p)", "--iters", "3")
    assert code == 1 and out.startswith("inconclusive")


def test_prove_agrees_with_library(capsys):
    a, b = "(or p (and p q))", "p"
    ok, rep = prove_equal(parse_sexpr(a), parse_sexpr(b), load_theory("prop"), SaturationParams())
    code, out, _ = run(capsys, "prove", "--rules", "builtin:prop", "--lhs", a, "--rhs", b, "--json")
    doc = json.loads(out)
    assert (code == 0) == ok and doc["result"] == ("proved" if ok else "inconclusive")
    assert doc["report"]["iterations"] == rep.iterations


def test_rewrite_strategies(capsys, tmp_path):
    rules = tmp_path / "r.rules"
    rules.write_text("(+ ~a 0) --> ~a\n(* ~a 1) --> ~a\n(* ~a 0) => 0\n")
    # (* ~a 1) does not fit (* 1 x): the directed subset alone stops here
    code, out, _ = run(capsys, "rewrite", "--rules", str(rules), "--expr", "(+ (* 1 x) 0)")
    assert (code, out) == (0, "(* 1 x)\n")
    rules.write_text(rules.read_text() + "(* 1 ~a) --> ~a\n")
    code, out, _ = run(capsys, "rewrite", "--rules", str(rules), "--expr", "(+ (* 1 x) 0)")
    assert out == "x\n"
    code, out, _ = run(capsys, "rewrite", "--rules", str(rules), "--expr", "(+ (* 1 x) 0)", "--strategy", "prewalk", "--fixpoint")
    assert out == "x\n"


def test_rewrite_rejects_equational_rules(capsys):
    code, _, err = run(capsys, "rewrite", "--rules", "builtin:maths", "--expr", "(+ x 0)")
    assert code == 2 and "--skip-equational" in err
    code, out, _ = run(capsys, "rewrite", "--rules", "builtin:maths", "--expr", "(+ x 0)", "--skip-equational")
    assert (code, out) == (0, "x\n")


def test_rewrite_fixpoint_divergence(capsys, tmp_path):
    rules = tmp_path / "grow.rules"
    rules.write_text("(w ~x) --> (w (w ~x))\n")
    code, _, err = run(capsys, "rewrite", "--rules", str(rules), "--expr", "(w a)", "--fixpoint")
    assert code == 1 and err.startswith("egraphkit: ")


def test_dot(capsys, tmp_path):
    code, out, _ = run(capsys, "dot", "--expr", "(+ x 0)")
    assert code == 0 and out.count("subgraph cluster_") == 3
    path = tmp_path / "g.dot"
    code, out, _ = run(capsys, "dot", "--rules", "builtin:maths", "--expr", ZEROES, "--out", str(path))
    assert code == 0 and out == "" and path.read_text().startswith("digraph")


def test_bench_table_json_and_figure(capsys, tmp_path):
    fig = tmp_path / "b.png"
    code, out, _ = run(capsys, "bench", "--suite", "egraph", "--reps", "2", "--figure", str(fig))
    rows = [r.split("\t") for r in out.splitlines()]
    assert code == 0 and rows[0][0] == "case" and len(rows) == 3
    assert all(r[-1] == "ok" for r in rows[1:])
    assert fig.stat().st_size > 0
    code, out, _ = run(capsys, "bench", "--suite", "egraph_constructor", "--reps", "1", "--json")
    (rec,) = json.loads(out)
    assert rec["case"] == "egraph_constructor" and rec["result"] == "classes=10 nodes=10"


def test_bench_failure_exits_1(capsys, monkeypatch):
    bad = dataclasses.replace(bench.CASES[0], golden="0" * 16)
    monkeypatch.setattr(bench, "CASES", (bad,) + bench.CASES[1:])
    code, out, err = run(capsys, "bench", "--suite", "egraph_constructor", "--reps", "1")
    assert code == 1 and out.splitlines()[1].endswith("FAILED") and "egraph_constructor" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["bench", "--suite", "nope"],
        ["bench", "--reps", "0"],
        ["simplify", "--rules", "builtin:maths", "--expr", "(+ x"],
        ["simplify", "--rules", "builtin:nothing", "--expr", "x"],
        ["prove", "--rules", "builtin:prop", "--lhs", "p", "--rhs", "q", "--iters", "0"],
    ],
)
def test_input_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err.startswith("egraphkit: ")


def test_malformed_rule_file_reports_line(capsys, tmp_path):
    rules = tmp_path / "bad.rules"
    rules.write_text("ok: (+ ~a 0) --> ~a\n# fine\n(f ~a --> ~a\n")
    code, _, err = run(capsys, "simplify", "--rules", str(rules), "--expr", "x")
    assert code == 2 and f"{rules}:3:" in err


def test_io_errors_exit_4(capsys, tmp_path):
    code, _, err = run(capsys, "simplify", "--rules", str(tmp_path / "missing.rules"), "--expr", "x")
    assert code == 4 and "cannot read" in err
    locked = tmp_path / "ro"
    locked.mkdir()
    os.chmod(locked, 0o500)
    try:
        target = locked / "out.dot"
        code, _, _ = run(capsys, "dot", "--expr", "x", "--out", str(target))
        if os.geteuid() != 0:  # root ignores directory permissions
            assert code == 4
        code, _, _ = run(capsys, "dot", "--expr", "x", "--out", str(tmp_path / "no" / "dir" / "g.dot"))
        assert code == 4
    finally:
        os.chmod(locked, 0o700)


def test_no_finite_term_exits_3(capsys, monkeypatch):
    import math

    from egraphkit import cli

    monkeypatch.setitem(cli.COST_FUNCTIONS, "astsize", lambda node, kids: math.inf)
    code, _, err = run(capsys, "simplify", "--rules", "builtin:maths", "--expr", "x")
    assert code == 3 and "finite" in err


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "egraphkit", "simplify", "--rules", "builtin:maths", "--expr", "(* z 1)"],
        capture_output=True,
        text=True,
        timeout=60,
    )
    assert proc.returncode == 0 and proc.stdout == "z\n"
