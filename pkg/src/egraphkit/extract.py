"""Cost-based extraction of best terms from an e-graph."""

from __future__ import annotations

import math
from typing import Callable, Sequence

from .egraph import CALL, EXPR, EGraph, EGraphError, ENode, descriptor
from .term import Literal, Symbol, children, head, is_call, is_expr

INF = math.inf

CostFunction = Callable[[ENode, Sequence[float]], float]


class NoFiniteTerm(EGraphError):
    pass


def astsize(node: ENode, child_costs: Sequence[float]) -> float:
    """Number of nodes in the term: atoms cost 1."""
    return 1 + sum(child_costs)


def astdepth(node: ENode, child_costs: Sequence[float]) -> float:
    return 1 + max(child_costs, default=0)


COST_FUNCTIONS: dict[str, CostFunction] = {"astsize": astsize, "astdepth": astdepth}


class Extractor:
    """Best node per class, found by repeated relaxation until nothing improves.

    Ties go to the e-node with the smaller head id, then fewer children, then
    smaller child class ids.
    """

    def __init__(self, g: EGraph, cost: CostFunction = astsize):
        self.g = g
        self.cost_fn = cost
        self.best: dict[int, tuple] = {}
        self._terms: dict[int, object] = {}
        self._relax()

    def _relax(self):
        g, cost_fn, best = self.g, self.cost_fn, self.best
        order = sorted(g.classes)
        changed = True
        while changed:
            changed = False
            for cid in order:
                cur = best.get(cid)
                for node in g.classes[cid].nodes:
                    kids = node[2:]
                    child_costs = []
                    for k in kids:
                        b = best.get(k)
                        if b is None:
                            break
                        child_costs.append(b[0])
                    else:
                        c = cost_fn(node, child_costs)
                        if c == INF:
                            continue
                        key = (c, node[1], len(kids), kids, node[0])
                        if cur is None or key < cur[:5]:
                            cur = key + (node,)
                            best[cid] = cur
                            changed = True

    def cost(self, cid: int) -> float:
        b = self.best.get(self.g.find(cid))
        return INF if b is None else b[0]

    def term(self, cid: int, _active: set | None = None):
        cid = self.g.find(cid)
        t = self._terms.get(cid)
        if t is not None:
            return t
        b = self.best.get(cid)
        if b is None:
            raise NoFiniteTerm(f"e-class {cid} has no finite-cost term")
        active = set() if _active is None else _active
        if cid in active:
            raise NoFiniteTerm(f"best choice for e-class {cid} is cyclic")
        active.add(cid)
        node = b[5]
        kids = [self.term(k, active) for k in node[2:]]
        active.discard(cid)
        t = self.g.node_term(node, kids)
        self._terms[cid] = t
        return t

    def find_best(self, cid: int):
        return self.term(cid), self.cost(cid)


def extract(g: EGraph, cost: CostFunction = astsize, root: int | None = None):
    """Return ``(term, cost)`` of the cheapest term in ``root``'s class."""
    if root is None:
        root = g.root
    if root is None:
        raise NoFiniteTerm("no root class given")
    return Extractor(g, cost).find_best(g.find(root))


def term_cost(t, cost: CostFunction = astsize) -> float:
    """Cost of a concrete term, computed bottom-up over its e-node encoding."""
    scratch = EGraph()

    def go(t):
        if is_expr(t):
            kids = children(t)
            child_costs = [go(c) for c in kids]
            ids = tuple(scratch.add_term(c) for c in kids)
            k = CALL if is_call(t) else EXPR
            node = (descriptor(k, len(ids)), scratch.symbols.intern(str(head(t)))) + ids
            return cost(node, child_costs)
        node = scratch.literal_node(t) if isinstance(t, Literal) else scratch.symbol_node(str(t))
        return cost(node, [])

    return go(t)


def representative_term(g: EGraph, cid: int, max_depth: int = 4):
    """Small term from ``cid`` used to evaluate user predicates on e-classes.

    Subterms deeper than ``max_depth`` are cut off and replaced by an atom of
    their class when one exists, else by a ``%<id>`` placeholder symbol.
    """
    cache = getattr(g, "_rep_cache", None)
    if cache is None or cache[0] != g.version:
        cache = (g.version, Extractor(g, astsize), {})
        g._rep_cache = cache
    ext, memo = cache[1], cache[2]
    key = (g.find(cid), max_depth)
    hit = memo.get(key)
    if hit is None:
        hit = _rep(g, ext, key[0], max_depth)
        memo[key] = hit
    return hit


def _rep(g: EGraph, ext: Extractor, cid: int, depth: int):
    b = ext.best.get(cid)
    if b is None:
        return Symbol(f"%{cid}")
    node = b[5]
    if len(node) == 2:
        return g.atom_term(node)
    if depth <= 1:
        for n in g.classes[cid].nodes:
            if len(n) == 2:
                return g.atom_term(n)
        return Symbol(f"%{cid}")
    return g.node_term(node, [_rep(g, ext, k, depth - 1) for k in node[2:]])
