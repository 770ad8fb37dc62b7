"""Constant evaluator behind dynamic (``=>``) rules loaded from text.

The right-hand side is walked bottom-up.  An operator node whose arguments are
all literals and whose head is a known operator is folded into a literal; any
other node is rebuilt symbolically, so ``(* ~a 0) => 0`` and
``(+ ~a::int 1) => (+ ~a 1)`` go through the same path.

Integers are 64-bit signed and exact; leaving that range is an error rather
than a silent promotion.  Mixing ints and floats promotes to float, ``/``
always produces a float.
"""

from __future__ import annotations

import math
import operator
from typing import Callable, Generic, TypeVar

from .pattern import EvalExpr, PatExpr, PatGroundSymbol, PatLiteral, PatVar, Pattern
from .term import Kind, LitTag, Literal, Symbol, make_term

INT_MIN = -(2**63)
INT_MAX = 2**63 - 1

V = TypeVar("V")


class EvalError(ArithmeticError):
    pass


def _num(x: Literal):
    if x.tag is LitTag.INT or x.tag is LitTag.FLOAT:
        return x.value
    raise EvalError(f"{x} is not a number")


def _bool(x: Literal) -> bool:
    if x.tag is LitTag.BOOL:
        return x.value
    raise EvalError(f"{x} is not a boolean")


def _wrap(v) -> Literal:
    if isinstance(v, bool):
        return Literal(v)
    if isinstance(v, int):
        if not INT_MIN <= v <= INT_MAX:
            raise EvalError("integer overflow")
        return Literal(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            raise EvalError("non-finite float result")
        return Literal(v)
    raise EvalError(f"unsupported result {v!r}")


def _fold_numeric(args, fn):
    vals = [_num(a) for a in args]
    acc = vals[0]
    for v in vals[1:]:
        acc = fn(acc, v)
    return _wrap(acc)


def _add(args):
    return _fold_numeric(args, operator.add)


def _mul(args):
    return _fold_numeric(args, operator.mul)


def _sub(args):
    if len(args) == 1:
        return _wrap(-_num(args[0]))
    return _fold_numeric(args, operator.sub)


def _div(args):
    if len(args) != 2:
        raise EvalError("/ takes two arguments")
    a, b = (float(_num(x)) for x in args)
    if b == 0.0:
        raise EvalError("division by zero")
    return _wrap(a / b)


def _pow(args):
    if len(args) != 2:
        raise EvalError("^ takes two arguments")
    a, b = (_num(x) for x in args)
    if isinstance(a, int) and isinstance(b, int):
        if b >= 0:
            if abs(a) > 1 and b > 64:
                raise EvalError("integer overflow")
            return _wrap(a**b)
        a = float(a)
    if a == 0 and b < 0:
        raise EvalError("zero to a negative power")
    try:
        r = float(a) ** float(b)
    except OverflowError as e:
        raise EvalError("float overflow") from e
    if isinstance(r, complex):
        raise EvalError("complex result")
    return _wrap(r)


def _and(args):
    return Literal(all([_bool(a) for a in args]))


def _or(args):
    return Literal(any([_bool(a) for a in args]))


def _not(args):
    if len(args) != 1:
        raise EvalError("not takes one argument")
    return Literal(not _bool(args[0]))


def _compare(fn):
    def run(args):
        if len(args) != 2:
            raise EvalError("comparisons take two arguments")
        a, b = (_num(x) for x in args)
        return Literal(bool(fn(a, b)))

    return run


def _equal(negate):
    def run(args):
        if len(args) != 2:
            raise EvalError("comparisons take two arguments")
        a, b = args
        if a.is_number and b.is_number:
            r = a.value == b.value
        else:
            r = a == b
        return Literal(r != negate)

    return run


OPERATORS: dict[str, Callable[[list[Literal]], Literal]] = {
    "+": _add,
    "-": _sub,
    "*": _mul,
    "/": _div,
    "^": _pow,
    "and": _and,
    "or": _or,
    "not": _not,
    "<": _compare(operator.lt),
    "<=": _compare(operator.le),
    ">": _compare(operator.gt),
    ">=": _compare(operator.ge),
    "==": _equal(False),
    "!=": _equal(True),
}


def fold(op: str, args: list[Literal]) -> Literal:
    try:
        return OPERATORS[op](args)
    except (OverflowError, ZeroDivisionError, ValueError) as e:
        raise EvalError(str(e)) from e


class Builder(Generic[V]):
    """How evaluation results are represented (terms, or e-class ids)."""

    def literal(self, lit: Literal) -> V:
        raise NotImplementedError

    def symbol(self, name: str) -> V:
        raise NotImplementedError

    def node(self, kind: Kind, head: str, args: list[V]) -> V:
        raise NotImplementedError

    def as_literal(self, v: V) -> Literal | None:
        raise NotImplementedError


class TermBuilder(Builder):
    def literal(self, lit):
        return lit

    def symbol(self, name):
        return Symbol(name)

    def node(self, kind, head, args):
        return make_term(kind, head, args)

    def as_literal(self, v):
        return v if isinstance(v, Literal) else None


def evaluate(expr: EvalExpr | Pattern, var_value: Callable[[PatVar], V], builder: Builder[V]) -> V:
    p = expr.expr if isinstance(expr, EvalExpr) else expr
    if isinstance(p, PatVar):
        return var_value(p)
    if isinstance(p, PatLiteral):
        return builder.literal(p.value)
    if isinstance(p, PatGroundSymbol):
        return builder.symbol(p.name)
    assert isinstance(p, PatExpr)
    args = [evaluate(a, var_value, builder) for a in p.args]
    if p.kind is Kind.CALL and p.head in OPERATORS:
        lits = [builder.as_literal(a) for a in args]
        if all(lit is not None for lit in lits):
            return builder.literal(fold(p.head, lits))
    return builder.node(p.kind, p.head, args)
