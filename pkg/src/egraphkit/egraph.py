"""E-graph with integer-encoded e-nodes and deferred (batched) rebuilding.

An e-node is a flat tuple of unsigned ints::

    (descriptor, head_id, child_1, ..., child_n)

``descriptor`` packs ``arity << 2 | kind`` where kind is one of ``SYM``,
``LIT``, ``CALL``, ``EXPR``.  ``head_id`` indexes the symbol table (or the
literal table for ``LIT`` nodes).  Equality and hashing of e-nodes are plain
tuple operations over those words.

E-class ids start at 1; 0 is reserved as a null id.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .term import Kind, Literal, Symbol, children, head, is_call, is_expr, make_term

SYM, LIT, CALL, EXPR = 0, 1, 2, 3
KIND_MASK = 3

DEFAULT_NODE_LIMIT = 100_000

ENode = tuple


class EGraphError(Exception):
    pass


class InvalidId(EGraphError):
    pass


class CapacityExceeded(EGraphError):
    pass


class InvariantViolation(EGraphError):
    def __init__(self, invariant: str, detail: str):
        super().__init__(f"{invariant} invariant broken: {detail}")
        self.invariant = invariant


def descriptor(kind: int, arity: int) -> int:
    return arity << 2 | kind


def node_kind(node: ENode) -> int:
    return node[0] & KIND_MASK


def node_arity(node: ENode) -> int:
    return node[0] >> 2


class Interner:
    """Bijection between hashable keys and dense ids."""

    __slots__ = ("ids", "items")

    def __init__(self):
        self.ids: dict = {}
        self.items: list = []

    def intern(self, key, item=None) -> int:
        i = self.ids.get(key)
        if i is None:
            i = len(self.items)
            self.ids[key] = i
            self.items.append(key if item is None else item)
        return i

    def get(self, key):
        return self.ids.get(key)

    def __getitem__(self, i):
        return self.items[i]

    def __len__(self):
        return len(self.items)


@dataclass
class EClass:
    id: int
    nodes: list = field(default_factory=list)
    parents: list = field(default_factory=list)

    def __len__(self):
        return len(self.nodes)

    def __iter__(self):
        return iter(self.nodes)


class EGraph:
    def __init__(self, seed=None, node_limit: int = DEFAULT_NODE_LIMIT):
        self.uf: list[int] = [0]
        self.memo: dict[ENode, int] = {}
        self.classes: dict[int, EClass] = {}
        self.pending: list[int] = []
        self.symbols = Interner()
        self.literals = Interner()
        self.node_limit = node_limit
        self.root: int | None = None
        self.version = 0
        if seed is not None:
            self.root = self.add_term(seed)

    # --- sizes -------------------------------------------------------------

    @property
    def node_count(self) -> int:
        return len(self.memo)

    @property
    def class_count(self) -> int:
        return len(self.classes)

    def __len__(self):
        return len(self.classes)

    def __getitem__(self, cid: int) -> EClass:
        return self.classes[self.find(cid)]

    def class_ids(self) -> list[int]:
        return sorted(self.classes)

    # --- union-find ----------------------------------------------------------

    def _check(self, cid: int):
        if not isinstance(cid, int) or cid <= 0 or cid >= len(self.uf):
            raise InvalidId(f"no e-class with id {cid!r}")

    def find(self, cid: int) -> int:
        uf = self.uf
        if cid <= 0 or cid >= len(uf):
            self._check(cid)
        while uf[cid] != cid:
            uf[cid] = uf[uf[cid]]
            cid = uf[cid]
        return cid

    def union(self, a: int, b: int) -> bool:
        a, b = self.find(a), self.find(b)
        if a == b:
            return False
        ca, cb = self.classes[a], self.classes[b]
        if len(cb.nodes) > len(ca.nodes) or (len(cb.nodes) == len(ca.nodes) and b < a):
            a, b, ca, cb = b, a, cb, ca
        self.uf[b] = a
        ca.nodes.extend(cb.nodes)
        ca.parents.extend(cb.parents)
        del self.classes[b]
        self.pending.append(a)
        self.version += 1
        return True

    # --- adding ------------------------------------------------------------------

    def canonicalize(self, node: ENode) -> ENode:
        if len(node) == 2:
            return node
        find = self.find
        return node[:2] + tuple([find(c) for c in node[2:]])

    def lookup(self, node: ENode) -> int | None:
        assert node == self.canonicalize(node), f"lookup of non-canonical e-node {node}"
        cid = self.memo.get(node)
        return None if cid is None else self.find(cid)

    def add_node(self, node: ENode) -> int:
        return self.add_canonical(self.canonicalize(node))

    def add_canonical(self, node: ENode) -> int:
        """``add_node`` for an e-node whose children are already canonical."""
        cid = self.memo.get(node)
        if cid is not None:
            return self.find(cid)
        if len(self.memo) >= self.node_limit:
            raise CapacityExceeded(f"e-graph node limit {self.node_limit} reached")
        cid = len(self.uf)
        self.uf.append(cid)
        self.classes[cid] = EClass(cid, [node], [])
        for child in set(node[2:]):
            self.classes[child].parents.append((node, cid))
        self.memo[node] = cid
        self.version += 1
        return cid

    def symbol_node(self, name: str) -> ENode:
        return (SYM, self.symbols.intern(name))

    def literal_node(self, lit: Literal) -> ENode:
        return (LIT, self.literals.intern(lit.key(), lit))

    def add_symbol(self, name: str) -> int:
        return self.add_node(self.symbol_node(name))

    def add_literal(self, lit: Literal) -> int:
        return self.add_node(self.literal_node(lit))

    def add_call(self, kind: Kind, op: str, kids: Iterable[int]) -> int:
        kids = tuple(kids)
        k = CALL if kind is Kind.CALL else EXPR
        return self.add_node((descriptor(k, len(kids)), self.symbols.intern(op)) + kids)

    def add_term(self, t) -> int:
        if isinstance(t, Literal):
            return self.add_literal(t)
        if isinstance(t, Symbol):
            return self.add_symbol(t.name)
        if is_expr(t):
            kids = [self.add_term(c) for c in children(t)]
            return self.add_call(Kind.CALL if is_call(t) else Kind.EXPR, str(head(t)), kids)
        return self.add_symbol(str(t))

    # --- rebuilding -----------------------------------------------------------

    def _repair(self, cid: int):
        cls = self.classes[cid]
        parents = cls.parents
        cls.parents = []
        fresh: dict[ENode, int] = {}
        for node, pid in parents:
            node = self.canonicalize(node)
            prev = fresh.get(node)
            if prev is not None:
                self.union(pid, prev)
            fresh[node] = self.find(pid)
        self.classes[self.find(cid)].parents.extend(fresh.items())

    def rebuild(self) -> int:
        """Restore congruence closure; returns the number of repaired classes."""
        repaired = 0
        while self.pending:
            todo = dict.fromkeys(self.find(c) for c in self.pending)
            self.pending = []
            for cid in todo:
                self._repair(self.find(cid))
                repaired += 1
        if repaired:
            self._rebuild_classes()
        return repaired

    def _rebuild_classes(self):
        # a parent recanonicalized through one child's class keeps its old
        # form in its other children's parent lists, so the memo is rebuilt
        # here rather than patched entry by entry
        memo = {}
        for cid, cls in self.classes.items():
            nodes = dict.fromkeys(self.canonicalize(n) for n in cls.nodes)
            cls.nodes = list(nodes)
            for n in nodes:
                memo[n] = cid
        self.memo = memo
        if self.root is not None:
            self.root = self.find(self.root)

    @property
    def clean(self) -> bool:
        return not self.pending

    # --- queries ---------------------------------------------------------------

    def in_same_class(self, a: int, b: int) -> bool:
        return self.find(a) == self.find(b)

    def atom_term(self, node: ENode):
        k = node_kind(node)
        if k == SYM:
            return Symbol(self.symbols[node[1]])
        if k == LIT:
            return self.literals[node[1]]
        raise EGraphError(f"{node} is not an atom")

    def node_head(self, node: ENode) -> str:
        if node_kind(node) == LIT:
            from .term import print_sexpr

            return print_sexpr(self.literals[node[1]])
        return self.symbols[node[1]]

    def node_term(self, node: ENode, kids: list):
        k = node_kind(node)
        if k == SYM or k == LIT:
            return self.atom_term(node)
        return make_term(Kind.CALL if k == CALL else Kind.EXPR, self.symbols[node[1]], kids)

    def literals_in(self, cid: int) -> Iterator[tuple[int, Literal]]:
        for node in self.classes[self.find(cid)].nodes:
            if node[0] == LIT:
                yield node[1], self.literals[node[1]]

    def symbols_in(self, cid: int) -> Iterator[tuple[int, str]]:
        for node in self.classes[self.find(cid)].nodes:
            if node[0] == SYM:
                yield node[1], self.symbols[node[1]]

    def contains_term(self, t) -> int | None:
        """Class id representing ``t``, or ``None`` when it is not in the graph."""
        if isinstance(t, Literal):
            i = self.literals.get(t.key())
            return None if i is None else self._probe((LIT, i))
        if isinstance(t, Symbol):
            i = self.symbols.get(t.name)
            return None if i is None else self._probe((SYM, i))
        if is_expr(t):
            kids = []
            for c in children(t):
                cid = self.contains_term(c)
                if cid is None:
                    return None
                kids.append(cid)
            i = self.symbols.get(str(head(t)))
            if i is None:
                return None
            k = CALL if is_call(t) else EXPR
            return self._probe((descriptor(k, len(kids)), i) + tuple(kids))
        return None

    def _probe(self, node):
        cid = self.memo.get(self.canonicalize(node))
        return None if cid is None else self.find(cid)

    # --- checking -------------------------------------------------------------

    def assert_invariants(self):
        seen: dict[ENode, int] = {}
        total = 0
        for cid, cls in self.classes.items():
            if self.find(cid) != cid:
                raise InvariantViolation("canonical-class", f"class {cid} is not its own representative")
            for node in cls.nodes:
                total += 1
                for child in node[2:]:
                    if self.find(child) != child:
                        raise InvariantViolation(
                            "canonical-children", f"class {cid} holds {node} with stale child {child}"
                        )
                if node in seen:
                    raise InvariantViolation("congruence", f"{node} lives in classes {seen[node]} and {cid}")
                seen[node] = cid
                hit = self.memo.get(node)
                if hit is None or self.find(hit) != cid:
                    raise InvariantViolation("hashcons", f"{node} in class {cid} maps to {hit}")
        if len(self.memo) != total:
            extra = [n for n in self.memo if n not in seen]
            raise InvariantViolation("hashcons", f"stale memo entries {extra[:5]}")
