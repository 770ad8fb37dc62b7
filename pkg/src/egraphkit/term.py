"""Dynamically shaped terms and the uniform tree interface.

Every other module reaches into terms only through the interface functions
defined here (``is_expr``, ``is_call``, ``head``, ``children``, ``operation``,
``arguments`` and ``make_term``).  They are ``singledispatch`` functions so a
foreign expression type can be plugged in by registering implementations for
its class.
"""

from __future__ import annotations

import enum
import json
import math
import re
import struct
from dataclasses import dataclass, field
from functools import singledispatch
from typing import Any, Sequence


class TermError(Exception):
    pass


class NotAnExpression(TermError):
    pass


class EmptyCallHead(TermError):
    pass


class ParseError(TermError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class Kind(enum.Enum):
    SYMBOL = "symbol"
    LITERAL = "literal"
    CALL = "call"
    EXPR = "expr"


class LitTag(enum.Enum):
    INT = "int"
    FLOAT = "float"
    BOOL = "bool"
    STR = "str"


class Term:
    """Base class of the native term types."""

    __slots__ = ()
    kind: Kind


@dataclass(frozen=True, slots=True)
class Symbol(Term):
    name: str

    @property
    def kind(self) -> Kind:
        return Kind.SYMBOL

    def __str__(self) -> str:
        return self.name


def _float_key(x: float) -> int:
    return struct.unpack("<q", struct.pack("<d", x))[0]


@dataclass(frozen=True, slots=True, eq=False)
class Literal(Term):
    """A tagged constant.  ``Literal(2)`` and ``Literal(2.0)`` are distinct."""

    value: int | float | bool | str
    tag: LitTag = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        v = self.value
        if self.tag is None:
            if isinstance(v, bool):
                tag = LitTag.BOOL
            elif isinstance(v, int):
                tag = LitTag.INT
            elif isinstance(v, float):
                tag = LitTag.FLOAT
            elif isinstance(v, str):
                tag = LitTag.STR
            else:
                raise TermError(f"unsupported literal value {v!r}")
            object.__setattr__(self, "tag", tag)
        elif self.tag is LitTag.FLOAT and not isinstance(v, float):
            object.__setattr__(self, "value", float(v))

    @property
    def kind(self) -> Kind:
        return Kind.LITERAL

    def key(self) -> tuple:
        # floats compare by bit pattern so hashconsing is exact
        if self.tag is LitTag.FLOAT:
            return (self.tag, _float_key(self.value))
        return (self.tag, self.value)

    def __eq__(self, other):
        return isinstance(other, Literal) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"Literal({self.value!r})"

    def __str__(self) -> str:
        return print_sexpr(self)

    @property
    def is_number(self) -> bool:
        return self.tag is LitTag.INT or self.tag is LitTag.FLOAT


@dataclass(frozen=True, slots=True)
class Compound(Term):
    """A call (``Kind.CALL``) or non-call compound node (``Kind.EXPR``).

    ``type`` and ``metadata`` are carried along but never take part in
    equality or matching.
    """

    kind: Kind
    head: str
    children: tuple[Term, ...]
    type: Any = field(default=None, compare=False)
    metadata: Any = field(default=None, compare=False)

    def __str__(self) -> str:
        return print_sexpr(self)


def Call(head: str, children: Sequence[Term], **kw) -> Compound:
    return make_term(Kind.CALL, head, children, **kw)


def Expr(head: str, children: Sequence[Term] = (), **kw) -> Compound:
    return make_term(Kind.EXPR, head, children, **kw)


# --- the interface -------------------------------------------------------


@singledispatch
def is_expr(x) -> bool:
    return False


@is_expr.register
def _(x: Compound) -> bool:
    return True


@singledispatch
def is_call(x) -> bool:
    return False


@is_call.register
def _(x: Compound) -> bool:
    return x.kind is Kind.CALL


@singledispatch
def head(x):
    raise NotAnExpression(f"{x!r} is not an expression")


@head.register
def _(x: Compound):
    return x.head


@singledispatch
def children(x) -> Sequence:
    raise NotAnExpression(f"{x!r} is not an expression")


@children.register
def _(x: Compound):
    return x.children


@singledispatch
def operation(x):
    raise NotAnExpression(f"{x!r} is not a call")


@operation.register
def _(x: Compound):
    if x.kind is not Kind.CALL:
        raise NotAnExpression(f"{x!r} is not a call")
    return x.head


@singledispatch
def arguments(x) -> Sequence:
    raise NotAnExpression(f"{x!r} is not a call")


@arguments.register
def _(x: Compound):
    if x.kind is not Kind.CALL:
        raise NotAnExpression(f"{x!r} is not a call")
    return x.children


def term_kind(x) -> Kind:
    if is_call(x):
        return Kind.CALL
    if is_expr(x):
        return Kind.EXPR
    return Kind.LITERAL if isinstance(x, Literal) else Kind.SYMBOL


def classify(t) -> dict[str, bool]:
    return {"is_expr": is_expr(t), "is_call": is_call(t)}


def decompose(t) -> dict[str, Any]:
    out = {"head": head(t), "children": list(children(t))}
    if is_call(t):
        out["operation"] = operation(t)
        out["arguments"] = list(arguments(t))
    return out


def make_term(kind: Kind, head: str, children: Sequence[Term], type=None, metadata=None) -> Compound:
    if kind is Kind.CALL:
        if not head:
            raise EmptyCallHead("call terms need a non-empty head")
        if not children:
            raise TermError(f"call {head!r} needs at least one argument")
    elif kind is not Kind.EXPR:
        raise TermError(f"make_term cannot build {kind}")
    return Compound(kind, head, tuple(children), type, metadata)


# --- S-expression text format ----------------------------------------------

_TOKEN = re.compile(r'\s*(?:(?P<open>[(\[])|(?P<close>[)\]])|(?P<str>"(?:[^"\\]|\\.)*")|(?P<atom>[^\s()\[\]"]+))')
_INT = re.compile(r"[+-]?\d+\Z")
_FLOAT = re.compile(r"[+-]?(?:\d+\.\d*|\.\d+|\d+(?=[eE]))(?:[eE][+-]?\d+)?\Z")


def tokenize(text: str) -> list[tuple[str, str, int]]:
    """Split ``text`` into ``(kind, text, offset)`` tokens."""
    out = []
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                break
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError("unterminated string", start)
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    return out


def parse_atom(tok: str) -> Term:
    if _INT.match(tok):
        return Literal(int(tok))
    if _FLOAT.match(tok):
        return Literal(float(tok))
    if tok == "true":
        return Literal(True)
    if tok == "false":
        return Literal(False)
    return Symbol(tok)


class _Reader:
    def __init__(self, tokens, atom=parse_atom, end=None):
        self.tokens = tokens
        self.i = 0
        self.atom = atom
        self.end = end

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def read(self):
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", self.end)
        kind, text, off = tok
        self.i += 1
        if kind == "str":
            return Literal(json.loads(text))
        if kind == "atom":
            return self.atom(text)
        if kind == "close":
            raise ParseError(f"unexpected {text!r}", off)
        close = ")" if text == "(" else "]"
        nxt = self.peek()
        if nxt is None:
            raise ParseError("unbalanced parentheses", off)
        if nxt[0] == "close":
            raise ParseError("empty form", off)
        if nxt[0] != "atom" or not isinstance(parse_atom(nxt[1]), Symbol):
            raise ParseError("operator position must hold a symbol", nxt[2])
        self.i += 1
        op = nxt[1]
        args = []
        while True:
            tok = self.peek()
            if tok is None:
                raise ParseError("unbalanced parentheses", off)
            if tok[0] == "close":
                if tok[1] != close:
                    raise ParseError(f"mismatched {tok[1]!r}", tok[2])
                self.i += 1
                break
            args.append(self.read())
        if close == "]":
            return self.build(Kind.EXPR, op, args, off)
        if not args:
            raise ParseError(f"call {op!r} has no arguments", off)
        return self.build(Kind.CALL, op, args, off)

    def build(self, kind, op, args, off):
        return make_term(kind, op, args)


def parse_sexpr(text: str) -> Term:
    """Parse one term.  ``(f a b)`` is a call, ``[block a b]`` a non-call expression."""
    tokens = tokenize(text)
    r = _Reader(tokens, end=len(text))
    t = r.read()
    if r.peek() is not None:
        raise ParseError("trailing input", r.peek()[2])
    return t


def _print_literal(lit: Literal) -> str:
    v = lit.value
    if lit.tag is LitTag.BOOL:
        return "true" if v else "false"
    if lit.tag is LitTag.STR:
        return json.dumps(v, ensure_ascii=False)
    if lit.tag is LitTag.FLOAT:
        if not math.isfinite(v):
            raise TermError(f"non-finite float {v!r} has no text form")
        return repr(v)
    return str(v)


def print_sexpr(t) -> str:
    if isinstance(t, Symbol):
        return t.name
    if isinstance(t, Literal):
        return _print_literal(t)
    if is_expr(t):
        parts = [str(head(t))] + [print_sexpr(c) for c in children(t)]
        if is_call(t):
            return "(" + " ".join(parts) + ")"
        return "[" + " ".join(parts) + "]"
    return str(t)


def term_size(t) -> int:
    if is_expr(t):
        return 1 + sum(term_size(c) for c in children(t))
    return 1


def term_depth(t) -> int:
    if is_expr(t) and children(t):
        return 1 + max(term_depth(c) for c in children(t))
    return 1
