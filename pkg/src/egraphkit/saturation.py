"""Equality saturation: search, apply, rebuild until a stop condition."""

from __future__ import annotations

import enum
import time
from dataclasses import asdict, dataclass, field
from typing import Callable

from .egraph import CALL, EXPR, CapacityExceeded, DEFAULT_NODE_LIMIT, EGraph, descriptor
from .ematch import CompiledEMatcher, EMatchSubstitution, head_index
from .evaluate import Builder, EvalError, evaluate
from .term import Kind, Literal
from .pattern import (
    Callback,
    EvalExpr,
    PatExpr,
    PatGroundSymbol,
    PatLiteral,
    PatVar,
    Pattern,
    Rewrite,
    RuleKind,
    Theory,
    pattern_vars,
)

# tests flip this on to check e-graph invariants after every iteration
debug_checks = False


class StopReason(enum.Enum):
    SATURATED = "saturated"
    ITERATION_LIMIT = "iteration_limit"
    NODE_LIMIT = "node_limit"
    TIME_LIMIT = "time_limit"
    GOAL = "goal"


class SchedulerKind(enum.Enum):
    SIMPLE = "simple"
    BACKOFF = "backoff"


@dataclass
class SaturationParams:
    timeout: int = 8  # iterations, not seconds
    node_limit: int = DEFAULT_NODE_LIMIT
    time_limit: float | None = None  # milliseconds
    scheduler: SchedulerKind = SchedulerKind.BACKOFF
    backoff_match_limit: int = 1000
    backoff_ban_length: int = 5
    timer: bool = False
    check_invariants: bool = False

    def __post_init__(self):
        if isinstance(self.scheduler, str):
            self.scheduler = SchedulerKind(self.scheduler)
        for name in ("timeout", "node_limit", "backoff_match_limit", "backoff_ban_length"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time_limit must be positive")


@dataclass
class IterationStats:
    iteration: int
    matches: dict[str, int] = field(default_factory=dict)
    applied: int = 0
    unions: int = 0
    eval_errors: int = 0
    skipped: list[str] = field(default_factory=list)
    banned: list[str] = field(default_factory=list)
    nodes: int = 0
    classes: int = 0
    search_ms: float | None = None
    apply_ms: float | None = None
    rebuild_ms: float | None = None


@dataclass
class Report:
    iterations: int = 0
    stop_reason: StopReason | None = None
    nodes: int = 0
    classes: int = 0
    eval_errors: int = 0
    per_iteration: list[IterationStats] = field(default_factory=list)
    search_ms: float | None = None
    apply_ms: float | None = None
    rebuild_ms: float | None = None
    total_ms: float = 0.0

    def to_dict(self, timings: bool = True) -> dict:
        d = asdict(self)
        d["stop_reason"] = self.stop_reason.value if self.stop_reason else None
        if not timings:
            for key in ("search_ms", "apply_ms", "rebuild_ms", "total_ms"):
                d.pop(key)
            for it in d["per_iteration"]:
                for key in ("search_ms", "apply_ms", "rebuild_ms"):
                    it.pop(key)
        return d


# --- schedulers ------------------------------------------------------------------


class SimpleScheduler:
    """Every rule, every iteration."""

    def should_skip(self, iteration: int, rule: str) -> bool:
        return False

    def inform(self, iteration: int, rule: str, match_count: int) -> bool:
        """Record a search result; ``False`` means drop this iteration's matches."""
        return True

    def can_stop(self, iteration: int) -> bool:
        return True

    def banned(self, iteration: int) -> list[str]:
        return []


@dataclass
class _RuleStats:
    threshold: int
    ban_length: int
    banned_until: int = 0
    times_banned: int = 0


class BackoffScheduler:
    """Ban a rule whose match count exceeds its threshold.

    A rule reporting more than ``threshold`` matches at iteration ``i`` is
    skipped for iterations ``i+1 .. i+ban_length``; each offense doubles both
    the rule's threshold and its next ban length.
    """

    def __init__(self, match_limit: int = 1000, ban_length: int = 5):
        self.match_limit = match_limit
        self.ban_length = ban_length
        self.stats: dict[str, _RuleStats] = {}

    def _get(self, rule: str) -> _RuleStats:
        st = self.stats.get(rule)
        if st is None:
            st = self.stats[rule] = _RuleStats(self.match_limit, self.ban_length)
        return st

    def should_skip(self, iteration: int, rule: str) -> bool:
        st = self.stats.get(rule)
        return st is not None and iteration < st.banned_until

    def inform(self, iteration: int, rule: str, match_count: int) -> bool:
        st = self._get(rule)
        if match_count > st.threshold:
            st.banned_until = iteration + 1 + st.ban_length
            st.times_banned += 1
            st.threshold *= 2
            st.ban_length *= 2
            return False
        return True

    def banned(self, iteration: int) -> list[str]:
        return [r for r, st in self.stats.items() if iteration < st.banned_until]

    def can_stop(self, iteration: int) -> bool:
        """Nothing changed: stop only when no rule is banned, else lift the bans early."""
        waiting = [st for st in self.stats.values() if st.banned_until > iteration + 1]
        if not waiting:
            return True
        delta = min(st.banned_until for st in waiting) - (iteration + 1)
        for st in waiting:
            st.banned_until -= delta
        return False


def make_scheduler(params: SaturationParams):
    if params.scheduler is SchedulerKind.SIMPLE:
        return SimpleScheduler()
    return BackoffScheduler(params.backoff_match_limit, params.backoff_ban_length)


# --- applying matches -------------------------------------------------------------


def _compile_rhs(p: Pattern):
    """Closure ``(g, ids) -> class id`` adding ``p`` with its slots filled by ``ids``.

    ``ids`` must be canonical; every class id built along the way is too, so
    the e-nodes go straight to the hashcons.
    """
    if isinstance(p, PatVar):
        slot = p.slot
        return lambda g, ids: ids[slot]
    if isinstance(p, PatLiteral):
        value = p.value
        return lambda g, ids: g.add_literal(value)
    if isinstance(p, PatGroundSymbol):
        name = p.name
        return lambda g, ids: g.add_symbol(name)
    assert isinstance(p, PatExpr)
    subs = [_compile_rhs(a) for a in p.args]
    desc = descriptor(CALL if p.kind is Kind.CALL else EXPR, len(subs))
    name = p.head

    def build(g, ids):
        node = (desc, g.symbols.intern(name)) + tuple([sub(g, ids) for sub in subs])
        return g.add_canonical(node)

    return build


def _add_pattern(g: EGraph, p: Pattern, ids: tuple[int, ...]) -> int:
    return _compile_rhs(p)(g, ids)


class _ClassBuilder(Builder):
    """Evaluation results as e-class ids; literal witnesses stand in for bound slots."""

    def __init__(self, g: EGraph):
        self.g = g
        self.lits: dict[int, object] = {}

    def literal(self, lit):
        cid = self.g.add_literal(lit)
        self.lits[cid] = lit
        return cid

    def symbol(self, name):
        return self.g.add_symbol(name)

    def node(self, kind, head, args):
        return self.g.add_call(kind, head, args)

    def as_literal(self, v):
        hit = self.lits.get(v)
        if hit is not None:
            return hit
        for _, lit in self.g.literals_in(v):
            return lit
        return None


def _var_value(g: EGraph, builder: _ClassBuilder, sub: EMatchSubstitution):
    def value(v: PatVar):
        w = sub.witnesses[v.slot]
        cid = sub.ids[v.slot]
        if isinstance(w, Literal):
            builder.lits[cid] = w
        return cid

    return value


def callback_bindings(g: EGraph, rw: Rewrite, sub: EMatchSubstitution) -> dict:
    """Bindings for host callbacks: the literal witness, else a representative term."""
    from .extract import representative_term

    out = {}
    for i, name in enumerate(pattern_vars(rw.lhs)):
        w = sub.witnesses[i]
        out[name] = w if w is not None else representative_term(g, sub.ids[i])
    return out


def apply_match(g: EGraph, rw: Rewrite, match: tuple[int, EMatchSubstitution]) -> bool:
    """Add the instantiated right-hand side and union it with the matched class.

    Raises :class:`EvalError` when a dynamic right-hand side cannot be evaluated.
    """
    cid, sub = match[0], match[1]
    rhs = rw.rhs
    if isinstance(rhs, Pattern):
        build = rw.__dict__.get("_build")
        if build is None:
            build = _compile_rhs(rhs)
            object.__setattr__(rw, "_build", build)
        new = build(g, tuple([g.find(i) for i in sub.ids]))
    elif isinstance(rhs, EvalExpr):
        builder = _ClassBuilder(g)
        new = evaluate(rhs, _var_value(g, builder, sub), builder)
    else:
        assert isinstance(rhs, Callback)
        binds = match[2] if len(match) > 2 else callback_bindings(g, rw, sub)
        out = rhs.fn(binds, g)
        if out is None:  # the callback declined
            return False
        new = g.add_term(out)
    return g.union(cid, new)


# --- the loop ---------------------------------------------------------------------


def _ms(t0: float) -> float:
    return (time.perf_counter() - t0) * 1000.0


def _matchers(rewrites: list[Rewrite]) -> list[CompiledEMatcher]:
    out = []
    for rw in rewrites:
        m = rw.__dict__.get("_ematcher")
        if m is None:
            m = CompiledEMatcher(rw.lhs)
            object.__setattr__(rw, "_ematcher", m)
        out.append(m)
    return out


def saturate(
    g: EGraph,
    th: Theory,
    params: SaturationParams | None = None,
    goal: tuple[int, int] | None = None,
    on_iteration: Callable[[EGraph, IterationStats], None] | None = None,
) -> Report:
    params = params or SaturationParams()
    report = Report()
    start = time.perf_counter()
    check = params.check_invariants or debug_checks
    rewrites = th.rewrites() if isinstance(th, Theory) else list(th)
    matchers = _matchers(rewrites)
    scheduler = make_scheduler(params)
    timer = params.timer
    if timer:
        report.search_ms = report.apply_ms = report.rebuild_ms = 0.0
    saved_limit = g.node_limit
    g.node_limit = max(g.node_limit, params.node_limit)

    def finish(reason: StopReason) -> Report:
        g.node_limit = saved_limit
        report.stop_reason = reason
        report.nodes = g.node_count
        report.classes = g.class_count
        report.total_ms = _ms(start)
        return report

    g.rebuild()
    if goal is not None and g.find(goal[0]) == g.find(goal[1]):
        return finish(StopReason.GOAL)

    iteration = 0
    while True:
        if iteration >= params.timeout:
            return finish(StopReason.ITERATION_LIMIT)
        if params.time_limit is not None and _ms(start) >= params.time_limit:
            return finish(StopReason.TIME_LIMIT)
        iteration += 1
        stats = IterationStats(iteration)
        report.per_iteration.append(stats)
        report.iterations = iteration

        # search: read-only, every match collected before any is applied
        t0 = time.perf_counter()
        index = head_index(g)
        found: list[tuple[Rewrite, list]] = []
        for rw, m in zip(rewrites, matchers):
            if scheduler.should_skip(iteration, rw.name):
                stats.skipped.append(rw.name)
                continue
            ms = m.match_all(g, index.get(m.root_key, []) if m.root_key else None)
            stats.matches[rw.name] = len(ms)
            if scheduler.inform(iteration, rw.name, len(ms)):
                if isinstance(rw.rhs, Callback):
                    # callbacks see representative terms, taken while the graph is clean
                    ms = [(c, sub, callback_bindings(g, rw, sub)) for c, sub in ms]
                found.append((rw, ms))
            else:
                stats.banned.append(rw.name)
        if timer:
            stats.search_ms = _ms(t0)
            report.search_ms += stats.search_ms

        # apply
        t0 = time.perf_counter()
        nodes_before = g.node_count
        hit_limit = False
        try:
            for rw, ms in found:
                for match in ms:
                    try:
                        changed = apply_match(g, rw, match)
                    except EvalError:
                        stats.eval_errors += 1
                        continue
                    stats.applied += 1
                    stats.unions += changed
                    if g.node_count > params.node_limit:
                        hit_limit = True
                        break
                if hit_limit:
                    break
        except CapacityExceeded:
            hit_limit = True
        report.eval_errors += stats.eval_errors
        if timer:
            stats.apply_ms = _ms(t0)
            report.apply_ms += stats.apply_ms

        t0 = time.perf_counter()
        g.rebuild()
        if timer:
            stats.rebuild_ms = _ms(t0)
            report.rebuild_ms += stats.rebuild_ms
        stats.nodes, stats.classes = g.node_count, g.class_count
        if check:
            g.assert_invariants()
        if on_iteration is not None:
            on_iteration(g, stats)

        if goal is not None and g.find(goal[0]) == g.find(goal[1]):
            return finish(StopReason.GOAL)
        if hit_limit or g.node_count > params.node_limit:
            return finish(StopReason.NODE_LIMIT)
        if stats.unions == 0 and g.node_count == nodes_before and scheduler.can_stop(iteration):
            return finish(StopReason.SATURATED)


def prove_equal(a, b, th: Theory, params: SaturationParams | None = None):
    """Try to show ``a == b`` under ``th``; returns ``(proved, report)``.

    ``False`` only means inconclusive within the limits.
    """
    g = EGraph(node_limit=(params or SaturationParams()).node_limit)
    ca, cb = g.add_term(a), g.add_term(b)
    report = saturate(g, th, params, goal=(ca, cb))
    return g.find(ca) == g.find(cb), report
