"""Patterns, rules, guards and the textual rule grammar.

Rule lines look like::

    (+ ~a 0) --> ~a
    (* ~a::number ~b::number) => (* ~a ~b)
    (* ~a (+ ~b ~c)) == (+ (* ~a ~b) (* ~a ~c))
    (f ~x) --> (g ~x) where ~x::int

``-->`` is a directed rewrite, ``==`` an equation usable in both directions
and ``=>`` a dynamic rule whose right-hand side is evaluated.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Mapping, Sequence

from .term import (
    Kind,
    LitTag,
    Literal,
    ParseError,
    Symbol,
    Term,
    TermError,
    _Reader,
    is_call,
    is_expr,
    print_sexpr,
    tokenize,
)


class RuleError(TermError):
    pass


class UnboundVariable(RuleError):
    def __init__(self, name: str):
        super().__init__(f"variable ~{name} is not bound by the matching side")
        self.name = name


class GuardConflict(RuleError):
    def __init__(self, name: str, a, b):
        super().__init__(f"variable ~{name} carries conflicting guards {a} and {b}")
        self.name = name


class TheoryError(RuleError):
    def __init__(self, lineno: int, cause: Exception):
        super().__init__(f"line {lineno}: {cause}")
        self.lineno = lineno
        self.cause = cause
        self.cause = cause


# --- guards ------------------------------------------------------------------


class LiteralClass(enum.Enum):
    NUMBER = "number"
    INT = "int"
    FLOAT = "float"
    BOOL = "bool"
    STR = "str"
    SYM = "sym"

    def accepts(self, t) -> bool:
        if self is LiteralClass.SYM:
            return isinstance(t, Symbol)
        if not isinstance(t, Literal):
            return False
        if self is LiteralClass.NUMBER:
            return t.tag is LitTag.INT or t.tag is LitTag.FLOAT
        return t.tag.value == self.value

    def __call__(self, t) -> bool:
        return self.accepts(t)

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class UserPredicate:
    """A named host predicate over terms.

    During e-matching it is applied to a small representative term of the
    candidate e-class, so it should only look at the shape near the root.
    """

    name: str
    fn: Callable[[Any], bool] = field(compare=False)

    def __call__(self, t) -> bool:
        return bool(self.fn(t))

    def __str__(self):
        return self.name


Predicate = LiteralClass | UserPredicate

BUILTIN_GUARDS = {g.value: g for g in LiteralClass}


# --- pattern AST ---------------------------------------------------------------


class Pattern:
    __slots__ = ()


@dataclass(frozen=True)
class PatVar(Pattern):
    name: str
    slot: int = -1
    guard: Predicate | None = None


@dataclass(frozen=True)
class PatLiteral(Pattern):
    value: Literal


@dataclass(frozen=True)
class PatGroundSymbol(Pattern):
    name: str


@dataclass(frozen=True)
class PatExpr(Pattern):
    head: str
    args: tuple[Pattern, ...]
    kind: Kind = Kind.CALL


def iter_vars(p: Pattern) -> Iterator[PatVar]:
    if isinstance(p, PatVar):
        yield p
    elif isinstance(p, PatExpr):
        for a in p.args:
            yield from iter_vars(a)


def pattern_vars(p: Pattern) -> list[str]:
    """Distinct variable names, in slot order when slots are resolved."""
    seen: dict[str, int] = {}
    for v in iter_vars(p):
        seen.setdefault(v.name, v.slot)
    if all(s >= 0 for s in seen.values()):
        return sorted(seen, key=seen.__getitem__)
    return list(seen)


def pattern_size(p: Pattern) -> int:
    if isinstance(p, PatExpr):
        return 1 + sum(pattern_size(a) for a in p.args)
    return 1


def pattern_from_term(t) -> Pattern:
    """Turn a term into a pattern; symbols starting with ``~`` become variables."""
    if isinstance(t, Symbol):
        if t.name.startswith("~"):
            return _parse_var(t.name)
        return PatGroundSymbol(t.name)
    if isinstance(t, Literal):
        return PatLiteral(t)
    if is_expr(t):
        from .term import children, head

        kind = Kind.CALL if is_call(t) else Kind.EXPR
        return PatExpr(head(t), tuple(pattern_from_term(c) for c in children(t)), kind)
    raise RuleError(f"cannot build a pattern from {t!r}")


_VAR = re.compile(r"~([A-Za-z_][\w']*)(?:::(\w+))?\Z")


class _GuardName(str):
    """Guard name not yet resolved against the predicate registry."""


def _parse_var(tok: str) -> PatVar:
    m = _VAR.match(tok)
    if m is None:
        raise RuleError(f"malformed pattern variable {tok!r}")
    name, guard = m.groups()
    return PatVar(name, -1, _GuardName(guard) if guard else None)


def format_pattern(p: Pattern, shown: set | None = None) -> str:
    """Print a pattern; guards are printed at the first occurrence only."""
    if shown is None:
        shown = set()
    if isinstance(p, PatVar):
        s = "~" + p.name
        if p.guard is not None and p.name not in shown:
            s += f"::{p.guard}"
        shown.add(p.name)
        return s
    if isinstance(p, PatLiteral):
        return print_sexpr(p.value)
    if isinstance(p, PatGroundSymbol):
        return p.name
    inner = " ".join([p.head] + [format_pattern(a, shown) for a in p.args])
    return f"({inner})" if p.kind is Kind.CALL else f"[{inner}]"


def substitute_term(p: Pattern, lookup: Callable[[PatVar], Any]):
    """Build the term described by ``p`` with variables supplied by ``lookup``."""
    from .term import make_term

    if isinstance(p, PatVar):
        return lookup(p)
    if isinstance(p, PatLiteral):
        return p.value
    if isinstance(p, PatGroundSymbol):
        return Symbol(p.name)
    return make_term(p.kind, p.head, [substitute_term(a, lookup) for a in p.args])


# --- rules -------------------------------------------------------------------


class RuleKind(enum.Enum):
    DIRECTED = "-->"
    EQUATIONAL = "=="
    DYNAMIC = "=>"


@dataclass(frozen=True)
class EvalExpr:
    """Right-hand side of a dynamic rule, computed by the built-in evaluator."""

    expr: Pattern

    def __str__(self):
        return format_pattern(self.expr, shown=set(_all_var_names(self.expr)))


@dataclass(frozen=True)
class Callback:
    """Right-hand side of a dynamic rule given as a host function.

    ``fn(bindings, egraph)`` receives a mapping from variable names to terms
    (``egraph`` is ``None`` in classical rewriting) and returns a term.
    """

    fn: Callable[[Mapping[str, Any], Any], Any] = field(compare=False)
    name: str = "<callback>"

    def __str__(self):
        return self.name


DynamicRhs = EvalExpr | Callback


def _all_var_names(p):
    return {v.name for v in iter_vars(p)}


@dataclass(frozen=True)
class Rewrite:
    """One orientation of a rule, the unit that e-matching and scheduling see."""

    rule: "Rule"
    lhs: Pattern
    rhs: Pattern | DynamicRhs
    name: str
    reversed: bool = False


@dataclass(frozen=True, eq=False)
class Rule:
    kind: RuleKind
    name: str
    lhs: Pattern
    rhs: Pattern | DynamicRhs
    var_count: int
    orientations: tuple[Rewrite, ...] = ()

    def __post_init__(self):
        if self.kind is RuleKind.EQUATIONAL:
            fwd = Rewrite(self, self.lhs, self.rhs, self.name)
            rev = Rewrite(self, self.rhs, self.lhs, self.name + "-rev", True)
            object.__setattr__(self, "orientations", (fwd, rev))
        else:
            object.__setattr__(self, "orientations", (Rewrite(self, self.lhs, self.rhs, self.name),))

    @property
    def var_names(self) -> list[str]:
        return pattern_vars(self.lhs)

    def __call__(self, term):
        from .matcher import apply_rule

        return apply_rule(self, term)

    def __eq__(self, other):
        if not isinstance(other, Rule):
            return NotImplemented
        return (self.kind, self.name, self.lhs, self.rhs, self.var_count) == (
            other.kind,
            other.name,
            other.lhs,
            other.rhs,
            other.var_count,
        )

    def __hash__(self):
        return hash((self.kind, self.name, self.lhs))

    def __str__(self):
        return format_rule(self)


def format_rule(r: Rule) -> str:
    shown: set[str] = set()
    left = format_pattern(r.lhs, shown)
    if isinstance(r.rhs, Pattern):
        right = format_pattern(r.rhs, shown)
    else:
        right = str(r.rhs)
    return f"{left} {r.kind.value} {right}"


def _resolve(p: Pattern, slots: dict[str, int], guards: dict[str, Predicate | None]) -> Pattern:
    if isinstance(p, PatVar):
        return PatVar(p.name, slots[p.name], guards.get(p.name))
    if isinstance(p, PatExpr):
        return PatExpr(p.head, tuple(_resolve(a, slots, guards) for a in p.args), p.kind)
    return p


def _lookup_guard(g, predicates: Mapping[str, Any] | None):
    if g is None or not isinstance(g, _GuardName):
        return g
    if g in BUILTIN_GUARDS:
        return BUILTIN_GUARDS[g]
    if predicates and g in predicates:
        pred = predicates[g]
        return pred if isinstance(pred, UserPredicate) else UserPredicate(g, pred)
    raise RuleError(f"unknown guard {g!r}")


def make_rule(
    kind: RuleKind,
    lhs: Pattern,
    rhs: Pattern | DynamicRhs | Callable,
    name: str | None = None,
    guards: Mapping[str, Any] | None = None,
    predicates: Mapping[str, Any] | None = None,
) -> Rule:
    """Build a rule programmatically, resolving variable slots and guards.

    ``guards`` maps variable names to guards given outside the patterns
    (the ``where`` clause); ``predicates`` resolves user guard names.
    """
    if kind is RuleKind.DYNAMIC:
        if callable(rhs) and not isinstance(rhs, (Pattern, EvalExpr, Callback)):
            rhs = Callback(rhs, getattr(rhs, "__name__", "<callback>"))
        elif isinstance(rhs, Pattern):
            rhs = EvalExpr(rhs)
    elif not isinstance(rhs, Pattern):
        raise RuleError(f"{kind.value} rules need a pattern right-hand side")

    found: dict[str, Predicate | None] = {}

    def note(name, g):
        g = _lookup_guard(g, predicates)
        if g is None:
            found.setdefault(name, None)
            return
        prev = found.get(name)
        if prev is not None and prev != g:
            raise GuardConflict(name, prev, g)
        found[name] = g

    slots: dict[str, int] = {}
    for v in iter_vars(lhs):
        slots.setdefault(v.name, len(slots))
        note(v.name, v.guard)
    rhs_pat = rhs.expr if isinstance(rhs, EvalExpr) else rhs if isinstance(rhs, Pattern) else None
    if rhs_pat is not None:
        rhs_names = []
        for v in iter_vars(rhs_pat):
            rhs_names.append(v.name)
            if v.name not in slots:
                if kind is not RuleKind.EQUATIONAL:
                    raise UnboundVariable(v.name)
                slots[v.name] = len(slots)
            note(v.name, v.guard)
        if kind is RuleKind.EQUATIONAL:
            lhs_names = {v.name for v in iter_vars(lhs)}
            for n in rhs_names:
                if n not in lhs_names:
                    raise UnboundVariable(n)
            for n in lhs_names:
                if n not in rhs_names:
                    raise UnboundVariable(n)
    for vname, g in (guards or {}).items():
        if vname not in slots:
            raise UnboundVariable(vname)
        note(vname, _GuardName(g) if isinstance(g, str) else g)

    lhs = _resolve(lhs, slots, found)
    if isinstance(rhs, EvalExpr):
        rhs = EvalExpr(_resolve(rhs.expr, slots, found))
    elif isinstance(rhs, Pattern):
        rhs = _resolve(rhs, slots, found)
    return Rule(kind, name or "", lhs, rhs, len(slots))


_ARROWS = {"-->": RuleKind.DIRECTED, "==": RuleKind.EQUATIONAL, "=>": RuleKind.DYNAMIC}
_NAME_PREFIX = re.compile(r"\s*([\w.\-]+)\s*:(?!:)\s+")


def _read_pattern(tokens, end) -> Pattern:
    reader = _PatReader(tokens, end=end)
    p = reader.read()
    if reader.peek() is not None:
        raise ParseError("trailing input in pattern", reader.peek()[2])
    return p


class _PatReader(_Reader):
    """The term reader, but producing patterns."""

    def __init__(self, tokens, end=None):
        super().__init__(tokens, atom=self._atom, end=end)

    @staticmethod
    def _atom(text):
        if text.startswith("~"):
            return _parse_var(text)
        from .term import parse_atom

        return pattern_from_term(parse_atom(text))

    def read(self):
        tok = self.peek()
        if tok is not None and tok[0] == "str":
            return PatLiteral(super().read())
        return super().read()

    def build(self, kind, op, args, off):
        if op.startswith("~"):
            raise ParseError("pattern variables cannot stand in operator position", off)
        return PatExpr(op, tuple(args), kind)


def parse_pattern(text: str) -> Pattern:
    p = _read_pattern(tokenize(text), len(text))
    return _resolve_standalone(p)


def _resolve_standalone(p: Pattern) -> Pattern:
    slots: dict[str, int] = {}
    guards: dict[str, Predicate | None] = {}
    for v in iter_vars(p):
        slots.setdefault(v.name, len(slots))
        g = _lookup_guard(v.guard, None)
        if g is not None:
            if guards.get(v.name) not in (None, g):
                raise GuardConflict(v.name, guards[v.name], g)
            guards[v.name] = g
    return _resolve(p, slots, guards)


def parse_rule(line: str, name: str | None = None, predicates: Mapping[str, Any] | None = None) -> Rule:
    """Parse one rule line; an optional ``name:`` prefix names the rule."""
    m = _NAME_PREFIX.match(line)
    if m and m.group(1) not in _ARROWS:
        name = name or m.group(1)
        base = m.end()
    else:
        base = 0
    body = line[base:]
    tokens = [(k, t, off + base) for k, t, off in tokenize(body)]
    depth = 0
    arrow_at = where_at = None
    for i, (k, t, off) in enumerate(tokens):
        if k == "open":
            depth += 1
        elif k == "close":
            depth -= 1
        elif depth == 0 and k == "atom":
            if t in _ARROWS and arrow_at is None:
                arrow_at = i
            elif t == "where" and arrow_at is not None:
                where_at = i
                break
    if arrow_at is None:
        raise ParseError("missing rule arrow (-->, == or =>)", len(line))
    kind = _ARROWS[tokens[arrow_at][1]]
    lhs_toks = tokens[:arrow_at]
    rhs_toks = tokens[arrow_at + 1 : where_at]
    if not lhs_toks:
        raise ParseError("empty left-hand side", tokens[arrow_at][2])
    if not rhs_toks:
        raise ParseError("empty right-hand side", tokens[arrow_at][2])
    lhs = _read_pattern(lhs_toks, tokens[arrow_at][2])
    rhs = _read_pattern(rhs_toks, len(line))
    guards = {}
    if where_at is not None:
        for k, t, off in tokens[where_at + 1 :]:
            for part in filter(None, t.split(",")):
                v = _parse_var(part)
                if v.guard is None:
                    raise ParseError(f"where-clause entry {part!r} has no guard", off)
                if v.name in guards and guards[v.name] != v.guard:
                    raise GuardConflict(v.name, guards[v.name], v.guard)
                guards[v.name] = str(v.guard)
    return make_rule(kind, lhs, rhs, name=name, guards=guards, predicates=predicates)


@dataclass
class Theory:
    rules: list[Rule] = field(default_factory=list)
    name: str = "theory"

    def __post_init__(self):
        seen = set()
        for i, r in enumerate(self.rules):
            if not r.name:
                r = Rule(r.kind, f"rule{i + 1}", r.lhs, r.rhs, r.var_count)
                self.rules[i] = r
            if r.name in seen:
                raise RuleError(f"duplicate rule name {r.name!r}")
            seen.add(r.name)

    def __len__(self):
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def rewrites(self) -> list[Rewrite]:
        return [o for r in self.rules for o in r.orientations]

    def without(self, kind: RuleKind) -> "Theory":
        return Theory([r for r in self.rules if r.kind is not kind], self.name)

    def __add__(self, other: "Theory") -> "Theory":
        """Union of both rule lists; a clashing name from ``other`` gets ``other.name`` as a prefix."""
        taken = {r.name for r in self.rules}
        extra = []
        for r in other.rules:
            if r.name in taken:
                r = Rule(r.kind, f"{other.name}.{r.name}", r.lhs, r.rhs, r.var_count)
            extra.append(r)
        return Theory(self.rules + extra, f"{self.name}+{other.name}")


def parse_theory(text: str, predicates: Mapping[str, Any] | None = None) -> Theory:
    name = "theory"
    rules = []
    seen: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if line.startswith("name:") and not rules and "-->" not in line and "==" not in line and "=>" not in line:
            name = line[5:].strip()
            continue
        try:
            default = None if _NAME_PREFIX.match(line) else f"rule{len(rules) + 1}"
            r = parse_rule(line, name=default, predicates=predicates)
        except TermError as e:
            raise TheoryError(lineno, e) from e
        if r.name in seen:
            raise TheoryError(lineno, RuleError(f"duplicate rule name {r.name!r} (first on line {seen[r.name]})"))
        seen[r.name] = lineno
        rules.append(r)
    return Theory(rules, name)


def _strip_comment(line: str) -> str:
    in_str = False
    esc = False
    for i, ch in enumerate(line):
        if in_str:
            if esc:
                esc = False
            elif ch == "\\":
                esc = True
            elif ch == '"':
                in_str = False
        elif ch == '"':
            in_str = True
        elif ch == "#":
            return line[:i]
    return line


def format_theory(th: Theory) -> str:
    lines = [f"name: {th.name}"]
    lines += [f"{r.name}: {format_rule(r)}" for r in th.rules]
    return "\n".join(lines) + "\n"


def theory(rules: Sequence[str | Rule], name: str = "theory", predicates=None) -> Theory:
    return Theory([r if isinstance(r, Rule) else parse_rule(r, predicates=predicates) for r in rules], name)
