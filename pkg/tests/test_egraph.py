import pytest

from egraphkit.egraph import (
    CALL,
    LIT,
    SYM,
    CapacityExceeded,
    EGraph,
    InvalidId,
    InvariantViolation,
    descriptor,
    node_arity,
    node_kind,
)
from egraphkit.term import Kind, Literal, Symbol, parse_sexpr


def T(text):
    return parse_sexpr(text)


def test_hashcons_shares_identical_subterms():
    g = EGraph()
    a = g.add_term(T("(f (g x) (g x))"))
    assert g.class_count == 3 and g.node_count == 3
    assert g.add_term(T("(g x)")) == g.contains_term(T("(g x)"))
    assert g.add_term(T("(f (g x) (g x))")) == a


def test_node_encoding():
    g = EGraph()
    x = g.add_symbol("x")
    one = g.add_literal(Literal(1))
    f = g.add_call(Kind.CALL, "f", [x, one])
    (node,) = g[f].nodes
    assert node_kind(node) == CALL and node_arity(node) == 2
    assert node[0] == descriptor(CALL, 2) and node[2:] == (x, one)
    assert g[x].nodes[0][0] == SYM and g[one].nodes[0][0] == LIT


def test_int_and_float_literals_stay_apart():
    g = EGraph()
    assert g.add_literal(Literal(1)) != g.add_literal(Literal(1.0))


def test_calls_and_bracket_exprs_stay_apart():
    g = EGraph()
    assert g.add_term(T("(f x)")) != g.add_term(T("[f x]"))


def test_union_then_rebuild_restores_congruence():
    g = EGraph()
    fa, fb = g.add_term(T("(f a)")), g.add_term(T("(f b)"))
    assert g.union(g.contains_term(T("a")), g.contains_term(T("b")))
    assert g.find(fa) != g.find(fb)  # deferred until rebuild
    g.rebuild()
    assert g.find(fa) == g.find(fb)
    assert g.union(fa, fb) is False
    g.assert_invariants()


def test_rebuild_propagates_upward():
    g = EGraph()
    top1, top2 = g.add_term(T("(h (f a))")), g.add_term(T("(h (f b))"))
    g.union(g.add_symbol("a"), g.add_symbol("b"))
    g.rebuild()
    assert g.in_same_class(top1, top2)
    assert g.class_count == 3


def test_invalid_ids():
    g = EGraph()
    g.add_symbol("x")
    for bad in (0, -1, 99):
        with pytest.raises(InvalidId):
            g.find(bad)
    with pytest.raises(InvalidId):
        g.union(1, 42)


def test_capacity_limit():
    g = EGraph(node_limit=3)
    g.add_term(T("(f a b)"))
    with pytest.raises(CapacityExceeded):
        g.add_symbol("c")
    assert g.add_symbol("a") == g.contains_term(T("a"))  # existing nodes still resolve


def test_seeded_graph_has_root():
    g = EGraph(T("(+ x 0)"))
    assert g.root == g.contains_term(T("(+ x 0)"))


def test_contains_term_misses():
    g = EGraph(T("(f a)"))
    assert g.contains_term(T("(f b)")) is None
    assert g.contains_term(T("(zz a)")) is None
    assert g.contains_term(Literal(3)) is None


def test_invariant_checker_catches_corruption():
    g = EGraph(T("(f a)"))
    g.assert_invariants()
    a = g.contains_term(Symbol("a"))
    g.memo.pop(g[a].nodes[0])
    with pytest.raises(InvariantViolation):
        g.assert_invariants()


def test_invariant_checker_catches_stale_children():
    g = EGraph()
    g.add_term(T("(f a)"))
    g.union(g.add_symbol("a"), g.add_symbol("b"))
    # without rebuild the parent may point at a non-canonical child
    if any(g.find(c) != c for cls in g.classes.values() for n in cls.nodes for c in n[2:]):
        with pytest.raises(InvariantViolation):
            g.assert_invariants()
    g.rebuild()
    g.assert_invariants()


def test_class_count_equals_distinct_subterms():
    from oracles import subterms

    t = T("(+ (+ (+ 0 (* (* 1 x) 0)) (* y 0)) y)")
    g = EGraph(t)
    assert g.class_count == len(set(subterms(t))) == 10
