"""E-matching: patterns compiled to closures that walk e-classes.

Compilation follows the classical matcher: one closure per pattern node,
continuation-passing, with the recursion doing the backtracking.  Unlike the
classical matcher every success is reported (a class may hold many e-nodes
that fit the pattern), so continuations never short-circuit.  Continuations
are wired at compile time and candidate classes travel through a register
file, so no closures are allocated while matching.
"""

from __future__ import annotations

from collections import defaultdict
from typing import NamedTuple

from .egraph import CALL, EXPR, LIT, SYM, EGraph, descriptor
from .pattern import LiteralClass, PatExpr, PatGroundSymbol, PatLiteral, PatVar, Pattern, iter_vars
from .term import Kind, Symbol


class EMatchSubstitution(NamedTuple):
    ids: tuple[int, ...]
    witnesses: tuple  # literal/symbol witnesses of guarded slots, else None


Match = tuple[int, EMatchSubstitution]


class _Env:
    __slots__ = ("g", "classes", "heads", "atoms", "witness", "out", "root", "regs")

    def __init__(self, g: EGraph, heads: dict, atoms: dict, nslots: int, nregs: int):
        self.g = g
        self.classes = g.classes
        self.heads = heads
        self.atoms = atoms
        self.witness = [None] * nslots
        self.out: dict = {}
        self.root = 0
        self.regs = [0] * nregs


def literal_witness(g: EGraph, cid: int, guard: LiteralClass):
    """Lowest-interned atom in ``cid`` accepted by ``guard``, or ``None``."""
    best = None
    for node in g.classes[cid].nodes:
        k = node[0]
        if guard is LiteralClass.SYM:
            if k == SYM and (best is None or node[1] < best):
                best = node[1]
        elif k == LIT and (best is None or node[1] < best) and guard.accepts(g.literals[node[1]]):
            best = node[1]
    if best is None:
        return None
    return Symbol(g.symbols[best]) if guard is LiteralClass.SYM else g.literals[best]


class _Compiler:
    """Builds one closure per pattern node.

    Every closure reads its candidate class from a register, and its
    continuation is fixed at compile time; a ``PatExpr`` writes the child
    class ids of each fitting e-node into fresh registers before continuing.
    """

    def __init__(self):
        self.nregs = 1

    def alloc(self, n: int) -> int:
        r = self.nregs
        self.nregs += n
        return r

    def seq(self, items, k):
        for p, reg in reversed(items):
            k = self.one(p, reg, k)
        return k

    def one(self, p: Pattern, reg: int, k):
        if isinstance(p, PatVar):
            return self.var(p, reg, k)
        if isinstance(p, (PatLiteral, PatGroundSymbol)):
            key = p.value.key() if isinstance(p, PatLiteral) else p.name

            def atom(env, s):
                hit = env.g.memo.get(env.atoms[key])
                if hit is not None and env.g.find(hit) == env.regs[reg]:
                    k(env, s)

            return atom

        assert isinstance(p, PatExpr)
        desc = descriptor(CALL if p.kind is Kind.CALL else EXPR, len(p.args))
        name = p.head
        n = len(p.args)
        first = self.alloc(n)
        inner = self.seq([(a, first + i) for i, a in enumerate(p.args)], k)
        stop = first + n

        def expr(env, s):
            hid = env.heads[name]
            regs = env.regs
            for node in env.classes[regs[reg]].nodes:
                if node[0] == desc and node[1] == hid:
                    regs[first:stop] = node[2:]
                    inner(env, s)

        return expr

    def var(self, p: PatVar, reg: int, k):
        slot, guard = p.slot, p.guard
        if guard is None:

            def var(env, s):
                cid = env.regs[reg]
                b = s[slot]
                if b == 0:
                    s[slot] = cid
                    k(env, s)
                    s[slot] = 0
                elif b == cid:
                    k(env, s)

            return var

        if isinstance(guard, LiteralClass):

            def guarded_var(env, s):
                cid = env.regs[reg]
                b = s[slot]
                if b == 0:
                    w = literal_witness(env.g, cid, guard)
                    if w is None:
                        return
                    s[slot] = cid
                    env.witness[slot] = w
                    k(env, s)
                    s[slot] = 0
                    env.witness[slot] = None
                elif b == cid:
                    k(env, s)

            return guarded_var

        def predicate_var(env, s):
            from .extract import representative_term

            cid = env.regs[reg]
            b = s[slot]
            if b == 0:
                if not guard(representative_term(env.g, cid)):
                    return
                s[slot] = cid
                k(env, s)
                s[slot] = 0
            elif b == cid:
                k(env, s)

        return predicate_var


def _done(env, s):
    key = (env.root, tuple(s))
    if key not in env.out:
        env.out[key] = tuple(env.witness)


def _heads_and_atoms(p: Pattern, heads: set, lits: set, syms: set):
    if isinstance(p, PatExpr):
        heads.add(p.head)
        for a in p.args:
            _heads_and_atoms(a, heads, lits, syms)
    elif isinstance(p, PatLiteral):
        lits.add(p.value)
    elif isinstance(p, PatGroundSymbol):
        syms.add(p.name)


class CompiledEMatcher:
    def __init__(self, pattern: Pattern):
        self.pattern = pattern
        self.nslots = max((v.slot for v in iter_vars(pattern)), default=-1) + 1
        heads: set = set()
        lits: set = set()
        syms: set = set()
        _heads_and_atoms(pattern, heads, lits, syms)
        self._heads, self._lits, self._syms = sorted(heads), list(lits), sorted(syms)
        comp = _Compiler()
        self._run = comp.one(pattern, 0, _done)
        self.nregs = comp.nregs
        if isinstance(pattern, PatExpr):
            self.root_key = (descriptor(CALL if pattern.kind is Kind.CALL else EXPR, len(pattern.args)), pattern.head)
        else:
            self.root_key = None

    def _env(self, g: EGraph) -> _Env | None:
        heads = {}
        for h in self._heads:
            i = g.symbols.get(h)
            if i is None:
                return None
            heads[h] = i
        atoms = {}
        for lit in self._lits:
            i = g.literals.get(lit.key())
            if i is None:
                return None
            atoms[lit.key()] = (LIT, i)
        for name in self._syms:
            i = g.symbols.get(name)
            if i is None:
                return None
            atoms[name] = (SYM, i)
        return _Env(g, heads, atoms, self.nslots, self.nregs)

    def _collect(self, env: _Env, cid: int):
        env.root = cid
        env.regs[0] = cid
        self._run(env, [0] * self.nslots)

    def __call__(self, g: EGraph, cid: int) -> list[Match]:
        env = self._env(g)
        if env is None:
            return []
        self._collect(env, g.find(cid))
        return [(c, EMatchSubstitution(ids, w)) for (c, ids), w in env.out.items()]

    def match_all(self, g: EGraph, candidates=None) -> list[Match]:
        env = self._env(g)
        if env is None:
            return []
        if candidates is None:
            candidates = sorted(g.classes)
        for cid in candidates:
            self._collect(env, cid)
        return [(c, EMatchSubstitution(ids, w)) for (c, ids), w in env.out.items()]


def compile_ematcher(p: Pattern) -> CompiledEMatcher:
    return CompiledEMatcher(p)


def head_index(g: EGraph) -> dict[tuple[int, str], list[int]]:
    """Map ``(descriptor, head name)`` to the sorted classes holding such an e-node."""
    index: dict = defaultdict(list)
    for cid in sorted(g.classes):
        seen = set()
        for node in g.classes[cid].nodes:
            if node[0] & 3 >= CALL:
                key = (node[0], node[1])
                if key not in seen:
                    seen.add(key)
                    index[(node[0], g.symbols[node[1]])].append(cid)
    return index


def ematch_all(g: EGraph, p: Pattern | CompiledEMatcher, index: dict | None = None) -> list[Match]:
    """All matches of ``p`` over canonical classes, ordered by class id."""
    m = p if isinstance(p, CompiledEMatcher) else CompiledEMatcher(p)
    candidates = None
    if index is not None and m.root_key is not None:
        candidates = index.get(m.root_key, [])
    return m.match_all(g, candidates)
