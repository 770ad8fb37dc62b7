"""Classical rewriting: compiled matchers, callable rules and combinators.

Patterns are compiled once into nested closures in continuation-passing
style.  Each closure checks one pattern node and then calls the continuation
for the rest of the pattern, so backtracking is just returning ``False`` up
the host call stack.

A rewriter is any callable ``term -> term | None`` where ``None`` means
"nothing changed".
"""

from __future__ import annotations

from typing import Callable, Sequence

from .evaluate import TermBuilder, evaluate
from .pattern import (
    Callback,
    EvalExpr,
    PatExpr,
    PatGroundSymbol,
    PatLiteral,
    PatVar,
    Pattern,
    Rule,
    RuleKind,
    iter_vars,
)
from .term import Kind, Literal, Symbol, TermError, arguments, children, head, is_call, is_expr, make_term, operation, term_kind

Substitution = list
Cont = Callable[[Substitution], bool]
Matcher = Callable[[object, Substitution, Cont], bool]
Rewriter = Callable[[object], object]

DEFAULT_FIXPOINT_CAP = 10_000


class NotCallable(TermError):
    pass


class UnfilledSlot(TermError):
    pass


class FixpointDiverged(TermError):
    pass


def _compile(p: Pattern) -> Matcher:
    if isinstance(p, PatVar):
        slot, guard = p.slot, p.guard

        def match_var(t, s, k):
            bound = s[slot]
            if bound is None:
                if guard is not None and not guard(t):
                    return False
                s[slot] = t
                if k(s):
                    return True
                s[slot] = None
                return False
            return bound == t and k(s)

        return match_var

    if isinstance(p, PatLiteral):
        value = p.value

        def match_literal(t, s, k):
            return isinstance(t, Literal) and t == value and k(s)

        return match_literal

    if isinstance(p, PatGroundSymbol):
        name = p.name

        def match_symbol(t, s, k):
            return isinstance(t, Symbol) and t.name == name and k(s)

        return match_symbol

    assert isinstance(p, PatExpr)
    h, arity, want_call = p.head, len(p.args), p.kind is Kind.CALL
    subs = [_compile(a) for a in p.args]

    def match_children(i, kids, s, k):
        if i == arity:
            return k(s)
        return subs[i](kids[i], s, lambda s2: match_children(i + 1, kids, s2, k))

    def match_expr(t, s, k):
        if want_call:
            if not is_call(t) or str(operation(t)) != h:
                return False
            kids = arguments(t)
        else:
            if not is_expr(t) or is_call(t) or str(head(t)) != h:
                return False
            kids = children(t)
        if len(kids) != arity:
            return False
        return match_children(0, kids, s, k)

    return match_expr


class CompiledMatcher:
    """Matches one pattern at the root of a term."""

    def __init__(self, pattern: Pattern):
        self.pattern = pattern
        self.var_count = max((v.slot for v in iter_vars(pattern)), default=-1) + 1
        self._run = _compile(pattern)

    def __call__(self, term, subst: Substitution | None = None) -> Substitution | None:
        s = [None] * self.var_count if subst is None else subst
        if self._run(term, s, lambda _: True):
            return s
        return None


def compile_pattern(p: Pattern) -> CompiledMatcher:
    return CompiledMatcher(p)


def instantiate(rhs: Pattern, s: Substitution):
    if isinstance(rhs, PatVar):
        t = s[rhs.slot] if rhs.slot < len(s) else None
        if t is None:
            raise UnfilledSlot(f"slot {rhs.slot} (~{rhs.name}) is empty")
        return t
    if isinstance(rhs, PatLiteral):
        return rhs.value
    if isinstance(rhs, PatGroundSymbol):
        return Symbol(rhs.name)
    return make_term(rhs.kind, rhs.head, [instantiate(a, s) for a in rhs.args])


def matcher_for(rule: Rule) -> CompiledMatcher:
    m = rule.__dict__.get("_matcher")
    if m is None:
        m = CompiledMatcher(rule.lhs)
        object.__setattr__(rule, "_matcher", m)
    return m


def bindings(rule: Rule, s: Substitution) -> dict:
    names = rule.var_names
    return {n: s[i] for i, n in enumerate(names)}


def apply_rule(rule: Rule, term):
    """Rewrite ``term`` at its root with ``rule``; ``None`` when it does not match."""
    if rule.kind is RuleKind.EQUATIONAL:
        raise NotCallable(f"equational rules are not callable ({rule.name or rule})")
    s = matcher_for(rule)(term)
    if s is None:
        return None
    if rule.kind is RuleKind.DIRECTED:
        return instantiate(rule.rhs, s)
    rhs = rule.rhs
    if isinstance(rhs, Callback):
        return rhs.fn(bindings(rule, s), None)
    assert isinstance(rhs, EvalExpr)
    return evaluate(rhs, lambda v: s[v.slot], TermBuilder())


# --- combinators ------------------------------------------------------------


class Chain:
    """Run each rewriter in turn, feeding every result into the next."""

    def __init__(self, rewriters: Sequence[Rewriter]):
        self.rewriters = list(rewriters)

    def __call__(self, t):
        changed = False
        for rw in self.rewriters:
            out = rw(t)
            if out is not None:
                t = out
                changed = True
        return t if changed else None


class Fixpoint:
    def __init__(self, rewriter: Rewriter, cap: int = DEFAULT_FIXPOINT_CAP):
        self.rewriter = rewriter
        self.cap = cap

    def __call__(self, t):
        changed = False
        for step in range(self.cap):
            try:
                out = self.rewriter(t)
                if out is None or out == t:
                    return t if changed else None
            except RecursionError:
                # a growing rule can outrun the interpreter stack long before the cap
                raise FixpointDiverged(f"term grew too deep to rewrite after {step} steps") from None
            t = out
            changed = True
        raise FixpointDiverged(f"still rewriting after {self.cap} steps")


def _rebuild(t, kids, new_kids):
    if all(a is b for a, b in zip(kids, new_kids)):
        return t
    return make_term(term_kind(t), head(t), new_kids)


def _walk_children(t, walk):
    kids = children(t)
    new = []
    changed = False
    for c in kids:
        out = walk(c)
        if out is None:
            new.append(c)
        else:
            new.append(out)
            changed = True
    return _rebuild(t, kids, new) if changed else None


class Prewalk:
    """Apply at a node first, then descend into the (possibly new) children."""

    def __init__(self, rewriter: Rewriter):
        self.rewriter = rewriter

    def __call__(self, t):
        out = self.rewriter(t)
        cur = t if out is None else out
        if is_expr(cur):
            sub = _walk_children(cur, self)
            if sub is not None:
                return sub
        return out


class Postwalk:
    """Descend into children first, then apply at the rebuilt node."""

    def __init__(self, rewriter: Rewriter):
        self.rewriter = rewriter

    def __call__(self, t):
        cur = t
        if is_expr(t):
            sub = _walk_children(t, self)
            if sub is not None:
                cur = sub
        out = self.rewriter(cur)
        if out is not None:
            return out
        return cur if cur is not t else None


def chain(rs: Sequence[Rewriter]) -> Chain:
    return Chain(rs)


def fixpoint(r: Rewriter, cap: int = DEFAULT_FIXPOINT_CAP) -> Fixpoint:
    return Fixpoint(r, cap)


def prewalk(r: Rewriter) -> Prewalk:
    return Prewalk(r)


def postwalk(r: Rewriter) -> Postwalk:
    return Postwalk(r)


def rewrite(t, r: Rewriter):
    """Apply a rewriter and return the result, or ``t`` itself when unchanged."""
    out = r(t)
    return t if out is None else out
