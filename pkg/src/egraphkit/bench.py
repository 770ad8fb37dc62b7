"""Built-in benchmark suite.

Every case times the whole workflow: e-graph construction, saturation and
extraction (or the equality check).  Before a case's timings count, its
result is checked against a golden hash so that a fast but wrong engine
cannot report a good number.
"""

from __future__ import annotations

import hashlib
import statistics
import time
from dataclasses import dataclass, field
from functools import lru_cache

from .egraph import EGraph
from .pattern import Theory
from .saturation import SaturationParams, SchedulerKind, prove_equal
from .simplify import simplify_full
from .term import parse_sexpr, print_sexpr
from .theories import load_theory

DEFAULT_REPS = 21

ZEROES = "(+ (+ (+ 0 (* (* 1 x) 0)) (* y 0)) y)"


@dataclass(frozen=True)
class BenchCase:
    name: str
    kind: str  # "construct", "add", "simplify" or "prove"
    inputs: tuple[str, ...]
    golden: str
    theory: str | None = None
    params: SaturationParams = field(default_factory=SaturationParams)


@dataclass
class BenchResult:
    case: str
    median_ns: int
    reps: int
    stop_reason: str | None
    nodes: int
    classes: int
    result: str
    ok: bool

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "median_ns": self.median_ns,
            "reps": self.reps,
            "stop_reason": self.stop_reason,
            "nodes": self.nodes,
            "classes": self.classes,
            "result": self.result,
        }


def result_hash(result: str) -> str:
    return hashlib.sha256(result.encode("utf-8")).hexdigest()[:16]


CASES: tuple[BenchCase, ...] = (
    BenchCase("egraph_constructor", "construct", (ZEROES,), "9325f3f85e91d706"),
    BenchCase(
        "egraph_adddexpr",
        "add",
        (ZEROES, "(+ (* (/ (* (log x) (exp x)) (^ x 5)) 0) y)"),
        "a4bf14c6d519195f",
    ),
    BenchCase(
        "basic_maths_simpl1",
        "simplify",
        ("(+ (* a (+ b 0)) (* (^ a 1) (- c c)))",),
        "55aa735714032923",
        "basic_maths",
    ),
    BenchCase(
        "basic_maths_simpl2",
        "simplify",
        ("(+ (* (^ x 2) (- 7 4)) (* (* x x) (+ 1 0)))",),
        "5a821bc18d3acf51",
        "basic_maths",
    ),
    BenchCase(
        "prop_logic_demorgan",
        "prove",
        ("(not (or p q))", "(and (not p) (not q))"),
        "ad4f0f2a08ae928f",
        "prop",
        SaturationParams(timeout=16),
    ),
    BenchCase(
        "prop_logic_prove1",
        "prove",
        ("(and (impl (and p (impl p q)) q) (impl (and (impl p q) (not q)) (not p)))", "true"),
        "ad4f0f2a08ae928f",
        "prop",
        SaturationParams(timeout=16, scheduler=SchedulerKind.SIMPLE),
    ),
    BenchCase(
        "prop_logic_freges_theorem",
        "prove",
        ("(impl (impl p (impl q r)) (impl (impl p q) (impl p r)))", "true"),
        "ad4f0f2a08ae928f",
        "prop",
        SaturationParams(timeout=16),
    ),
    BenchCase(
        "calc_logic_demorgan",
        "prove",
        ("(not (or p q))", "(and (not p) (not q))"),
        "ad4f0f2a08ae928f",
        "calc",
        SaturationParams(timeout=16),
    ),
    BenchCase(
        "calc_logic_freges_theorem",
        "prove",
        ("(impl (impl p (impl q r)) (impl (impl p q) (impl p r)))", "true"),
        "ad4f0f2a08ae928f",
        "calc",
        SaturationParams(timeout=16),
    ),
)

SUITES = {
    "egraph": ("egraph_constructor", "egraph_adddexpr"),
    "basic_maths": ("basic_maths_simpl1", "basic_maths_simpl2"),
    "prop_logic": ("prop_logic_demorgan", "prop_logic_prove1", "prop_logic_freges_theorem"),
    "calc_logic": ("calc_logic_demorgan", "calc_logic_freges_theorem"),
}


def select(selector: str) -> list[BenchCase]:
    """Cases named by a comma-separated list of suite names, case names or ``all``."""
    by_name = {c.name: c for c in CASES}
    wanted: list[str] = []
    for part in (p.strip() for p in selector.split(",")):
        if part == "all":
            wanted.extend(by_name)
        elif part in SUITES:
            wanted.extend(SUITES[part])
        elif part in by_name:
            wanted.append(part)
        else:
            choices = ", ".join(["all", *SUITES, *by_name])
            raise ValueError(f"unknown bench suite or case {part!r}; choose from {choices}")
    return [by_name[n] for n in dict.fromkeys(wanted)]


@lru_cache(maxsize=None)
def _theory(name: str) -> Theory:
    return load_theory(name)


@lru_cache(maxsize=None)
def _parsed(text: str):
    return parse_sexpr(text)


def run_once(case: BenchCase) -> tuple[str, str | None, int, int]:
    """One end-to-end execution: ``(result, stop reason, nodes, classes)``."""
    terms = [_parsed(s) for s in case.inputs]
    if case.kind == "construct":
        g = EGraph(terms[0])
        return f"classes={g.class_count} nodes={g.node_count}", None, g.node_count, g.class_count
    if case.kind == "add":
        g = EGraph(terms[0])
        for t in terms[1:]:
            g.add_term(t)
        g.rebuild()
        return f"classes={g.class_count} nodes={g.node_count}", None, g.node_count, g.class_count
    th = _theory(case.theory)
    if case.kind == "simplify":
        r = simplify_full(terms[0], th, case.params)
        rep = r.report
        return print_sexpr(r.term), rep.stop_reason.value, rep.nodes, rep.classes
    if case.kind == "prove":
        ok, rep = prove_equal(terms[0], terms[1], th, case.params)
        return ("proved" if ok else "inconclusive"), rep.stop_reason.value, rep.nodes, rep.classes
    raise ValueError(f"unknown bench case kind {case.kind!r}")


def run_case(case: BenchCase, reps: int = DEFAULT_REPS) -> BenchResult:
    if reps < 1:
        raise ValueError("reps must be at least 1")
    result, stop, nodes, classes = run_once(case)
    ok = result_hash(result) == case.golden
    times = []
    for _ in range(reps):
        t0 = time.perf_counter_ns()
        again = run_once(case)[0]
        times.append(time.perf_counter_ns() - t0)
        ok = ok and again == result
    # median_low never interpolates, so even rep counts still report a real sample
    return BenchResult(case.name, int(statistics.median_low(times)), reps, stop, nodes, classes, result, ok)


def run_bench(selector: str = "all", reps: int = DEFAULT_REPS) -> list[BenchResult]:
    return [run_case(c, reps) for c in select(selector)]


TABLE_HEADER = ("case", "median_ms", "reps", "stop_reason", "nodes", "classes", "result", "status")


def format_table(results: list[BenchResult]) -> str:
    rows = ["\t".join(TABLE_HEADER)]
    for r in results:
        rows.append(
            "\t".join(
                [
                    r.case,
                    f"{r.median_ns / 1e6:.3f}",
                    str(r.reps),
                    r.stop_reason or "-",
                    str(r.nodes),
                    str(r.classes),
                    r.result,
                    "ok" if r.ok else "FAILED",
                ]
            )
        )
    return "\n".join(rows) + "\n"
