import math

import pytest

from egraphkit.egraph import EGraph
from egraphkit.extract import (
    COST_FUNCTIONS,
    Extractor,
    NoFiniteTerm,
    astdepth,
    astsize,
    extract,
    representative_term,
    term_cost,
)
from egraphkit.term import Symbol, parse_sexpr

from oracles import min_size_by_enumeration


def T(text):
    return parse_sexpr(text)


def test_picks_smallest_member():
    g = EGraph(T("(f (g a b))"))
    g.union(g.contains_term(T("(g a b)")), g.add_symbol("c"))
    g.rebuild()
    assert extract(g) == (T("(f c)"), 2)


def test_depth_cost_prefers_shallow_terms():
    g = EGraph()
    deep = g.add_term(T("(f (f (f a)))"))
    wide = g.add_term(T("(g a a a a a a)"))
    g.union(deep, wide)
    g.rebuild()
    assert extract(g, astsize, deep)[0] == T("(f (f (f a)))")
    assert extract(g, astdepth, deep) == (T("(g a a a a a a)"), 2)
    assert set(COST_FUNCTIONS) == {"astsize", "astdepth"}


def test_ties_are_deterministic():
    g = EGraph()
    b, a = g.add_symbol("b"), g.add_symbol("a")
    g.union(b, a)
    g.rebuild()
    # same cost: the lower head id (interned first) wins
    assert extract(g, root=a)[0] == Symbol("b")


def test_cycle_only_class_has_no_finite_term():
    g = EGraph()
    fa = g.add_term(T("(f a)"))
    a = g.contains_term(T("a"))
    g.union(fa, a)
    g.rebuild()
    assert extract(g, root=fa) == (Symbol("a"), 1)
    # a class whose only node refers to itself
    inf = lambda node, kids: math.inf if len(node) == 2 else 1 + sum(kids)  # noqa: E731
    with pytest.raises(NoFiniteTerm):
        extract(g, inf, fa)


def test_no_root():
    with pytest.raises(NoFiniteTerm):
        extract(EGraph())


def test_term_cost():
    assert term_cost(T("(+ (* x 2) y)")) == 5
    assert term_cost(T("(+ (* x 2) y)"), astdepth) == 3
    assert term_cost(Symbol("x")) == 1


def test_extractor_agrees_with_enumeration():
    g = EGraph(T("(h (f a) (f b))"))
    g.union(g.contains_term(T("(f a)")), g.contains_term(T("b")))
    g.rebuild()
    ext = Extractor(g)
    for cid in g.class_ids():
        assert ext.cost(cid) == min_size_by_enumeration(g, cid)
        assert term_cost(ext.term(cid)) == ext.cost(cid)


def test_representative_term_cuts_depth():
    g = EGraph(T("(f (f (f (f (f a)))))"))
    assert representative_term(g, g.root, max_depth=2) == T("(f %5)")  # placeholder names the class
    assert representative_term(g, g.root, max_depth=10) == T("(f (f (f (f (f a)))))")
