"""The whole workflow: build an e-graph, saturate, extract."""

from __future__ import annotations

from dataclasses import dataclass

from .egraph import EGraph
from .extract import CostFunction, astsize, extract
from .pattern import Theory
from .saturation import Report, SaturationParams, saturate


@dataclass
class SimplifyResult:
    term: object
    cost: float
    report: Report
    egraph: EGraph


def simplify_full(ex, th: Theory, params: SaturationParams | None = None, cost: CostFunction = astsize) -> SimplifyResult:
    params = params or SaturationParams()
    g = EGraph(node_limit=params.node_limit)
    g.root = g.add_term(ex)
    report = saturate(g, th, params)
    term, c = extract(g, cost, g.root)
    return SimplifyResult(term, c, report, g)


def simplify(ex, th: Theory, params: SaturationParams | None = None, cost: CostFunction = astsize):
    return simplify_full(ex, th, params, cost).term
