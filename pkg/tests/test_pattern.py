import pytest

from egraphkit.pattern import (
    Callback,
    EvalExpr,
    GuardConflict,
    LiteralClass,
    PatExpr,
    PatGroundSymbol,
    PatLiteral,
    PatVar,
    RuleError,
    RuleKind,
    Theory,
    TheoryError,
    UnboundVariable,
    UserPredicate,
    format_pattern,
    format_rule,
    format_theory,
    make_rule,
    parse_pattern,
    parse_rule,
    parse_theory,
    pattern_size,
    pattern_vars,
    theory,
)
from egraphkit.term import Kind, Literal, ParseError, Symbol
from egraphkit.theories import BUILTIN, load_theory


def test_pattern_atoms_and_slots():
    p = parse_pattern("(f ~x (g ~y ~x) a 3)")
    assert isinstance(p, PatExpr) and p.head == "f"
    x, g, a, three = p.args
    assert x == PatVar("x", 0)
    assert g.args[0].slot == 1 and g.args[1].slot == 0
    assert a == PatGroundSymbol("a") and three == PatLiteral(Literal(3))
    assert pattern_vars(p) == ["x", "y"]
    assert pattern_size(p) == 7


def test_bracket_patterns_are_non_call_exprs():
    p = parse_pattern("[block ~a ~b]")
    assert p.kind is Kind.EXPR


@pytest.mark.parametrize(
    "line, kind",
    [
        ("(+ ~a 0) --> ~a", RuleKind.DIRECTED),
        ("(+ ~a ~b) == (+ ~b ~a)", RuleKind.EQUATIONAL),
        ("(* ~a 0) => 0", RuleKind.DYNAMIC),
    ],
)
def test_rule_arrows(line, kind):
    r = parse_rule(line)
    assert r.kind is kind
    assert len(r.orientations) == (2 if kind is RuleKind.EQUATIONAL else 1)
    if kind is RuleKind.DYNAMIC:
        assert isinstance(r.rhs, EvalExpr)


def test_equational_rule_has_named_reverse():
    r = parse_rule("comm: (+ ~a ~b) == (+ ~b ~a)")
    fwd, rev = r.orientations
    assert (fwd.name, rev.name) == ("comm", "comm-rev")
    assert rev.lhs == r.rhs and rev.reversed


def test_guards_inline_and_where_clause_agree():
    a = parse_rule("(+ ~x::int ~y::int) => (+ ~x ~y)")
    b = parse_rule("(+ ~x ~y) => (+ ~x ~y) where ~x::int ~y::int")
    assert a.lhs == b.lhs
    assert a.lhs.args[0].guard is LiteralClass.INT


def test_guard_applies_to_every_occurrence():
    r = parse_rule("(f ~x::int ~x) --> ~x")
    assert all(v.guard is LiteralClass.INT for v in (r.lhs.args[0], r.lhs.args[1]))


def test_conflicting_guards_rejected():
    with pytest.raises(GuardConflict):
        parse_rule("(f ~x::int ~x::float) --> ~x")


def test_user_predicate_guards():
    even = lambda t: isinstance(t, Literal) and t.value % 2 == 0  # noqa: E731
    r = parse_rule("(half ~n::even) => (/ ~n 2)", predicates={"even": even})
    g = r.lhs.args[0].guard
    assert isinstance(g, UserPredicate) and g.name == "even"
    with pytest.raises(RuleError, match="unknown guard"):
        parse_rule("(half ~n::odd) => (/ ~n 2)")


def test_unbound_right_hand_variables():
    with pytest.raises(UnboundVariable):
        parse_rule("(f ~a) --> (g ~b)")
    with pytest.raises(UnboundVariable):
        parse_rule("(f ~a ~b) == (g ~a)")  # both directions must be usable


@pytest.mark.parametrize(
    "line, fragment",
    [
        ("(f ~a) (g ~a)", "arrow"),
        ("--> x", "empty left"),
        ("(f ~a) -->", "empty right"),
        ("(~op ~a) --> ~a", "operator position"),
    ],
)
def test_malformed_rules(line, fragment):
    with pytest.raises(ParseError, match=fragment):
        parse_rule(line)


def test_callback_rules_from_host_functions():
    def swap(b, g):
        return Symbol("swapped")

    r = make_rule(RuleKind.DYNAMIC, parse_pattern("(f ~a)"), swap, name="swap")
    assert isinstance(r.rhs, Callback) and r.rhs.name == "swap"
    with pytest.raises(RuleError):
        make_rule(RuleKind.DIRECTED, parse_pattern("(f ~a)"), swap)


def test_format_round_trips_through_the_parser():
    for name in BUILTIN:
        th = load_theory(name)
        again = parse_theory(format_theory(th))
        assert again.name == th.name
        assert [(r.name, r.kind, r.lhs, r.rhs) for r in again] == [(r.name, r.kind, r.lhs, r.rhs) for r in th]


def test_format_pattern_shows_guard_once():
    r = parse_rule("(f ~x::int ~x) --> ~x")
    assert format_rule(r) == "(f ~x::int ~x) --> ~x"
    assert format_pattern(parse_pattern("(g ~a 1.5)")) == "(g ~a 1.5)"


def test_theory_text_handles_comments_names_and_errors():
    th = parse_theory(
        """
        # comment line
        name: demo
        zero: (+ ~a 0) --> ~a   # trailing comment
        (f "#not a comment") --> x
        """
    )
    assert th.name == "demo"
    assert [r.name for r in th] == ["zero", "rule2"]
    assert th.rules[1].lhs.args[0] == PatLiteral(Literal("#not a comment"))
    with pytest.raises(TheoryError) as info:
        parse_theory("ok: x --> y\n\nbad: (f ~a --> ~a\n")
    assert info.value.lineno == 3
    with pytest.raises(TheoryError) as info:
        parse_theory("a: x --> y\na: y --> x\n")
    assert info.value.lineno == 2


def test_theory_helpers():
    th = theory(["(+ ~a 0) --> ~a", "(+ ~a ~b) == (+ ~b ~a)"], name="t")
    assert len(th) == 2 and len(th.rewrites()) == 3
    assert len(th.without(RuleKind.EQUATIONAL)) == 1
    assert len(th + theory(["(* ~a 1) --> ~a"])) == 3
    with pytest.raises(RuleError, match="duplicate"):
        Theory([parse_rule("r: x --> y"), parse_rule("r: y --> x")])


def test_builtin_theories_load():
    sizes = {name: len(load_theory(name)) for name in BUILTIN}
    assert sizes["maths"] == 5
    assert all(n > 0 for n in sizes.values())
    with pytest.raises(KeyError):
        load_theory("nope")
