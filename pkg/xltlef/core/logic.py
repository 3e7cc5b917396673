"""Logic Core - sorted, hash-consed syntax trees for XLTL-EF

Every pipeline stage reads and writes the Node type defined here.

INVARIANTS:
1. Nodes are immutable and hash-consed: structurally equal nodes are the same object
2. The hash-consing table is the only shared mutable structure and is lock-guarded
3. Boolean-sorted terms (variables, parameters, predicate applications) double as formulas
4. Every event-freezing term resolves to exactly one default parameter through its Signature
5. Traversals are deterministic: children are visited left to right, results keep first-seen order
"""

import logging
import threading
import weakref
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Dict, Iterable, Iterator, List, NamedTuple, Optional, Sequence, Tuple


# ============================================================================
# SORTS AND TIME MODELS
# ============================================================================

class SortKind(Enum):
    BOOL = "bool"
    REAL = "real"
    INT = "int"
    UNINTERPRETED = "uninterpreted"


@dataclass(frozen=True)
class Sort:
    kind: SortKind
    name: str = ""

    @property
    def is_numeric(self) -> bool:
        return self.kind in (SortKind.REAL, SortKind.INT)

    def __str__(self) -> str:
        return self.name if self.kind is SortKind.UNINTERPRETED else self.kind.value


BOOL = Sort(SortKind.BOOL)
REAL = Sort(SortKind.REAL)
INT = Sort(SortKind.INT)

BUILTIN_SORTS = {"bool": BOOL, "real": REAL, "int": INT}


class TimeModel(Enum):
    DISCRETE = "discrete"
    DENSE = "dense"
    SUPER_DENSE = "super_dense"

    @classmethod
    def from_name(cls, name: str) -> "TimeModel":
        for model in cls:
            if model.value == name:
                return model
        raise ValueError(f"Unknown time model '{name}'")


# ============================================================================
# NODE KINDS
# ============================================================================

class Kind(Enum):
    # terms
    NUM = "num"
    VAR = "var"
    PARAM = "param"
    TIME = "time"
    APPLY = "apply"            # payload: '+', '-', '*', 'neg' or a function name
    ITE = "ite"
    AT_NEXT = "at_next"        # u @F~ (phi)
    AT_LAST = "at_last"        # u @P~ (phi)
    AT_NEXT_NS = "at_next_ns"  # u @F (phi)
    AT_LAST_NS = "at_last_ns"  # u @P (phi)
    AT_NEXT_ITER = "at_next_iter"  # payload k
    AT_LAST_ITER = "at_last_iter"  # payload k
    NEXT = "next"
    PREV = "prev"              # payload: name of the default parameter
    SYM = "sym"                # unresolved identifier, parser only

    # core formulas
    TRUE = "true"
    PRED = "pred"              # payload: '=', '<', '<=', '>', '>='
    NOT = "not"
    AND = "and"
    UNTIL_S = "until_s"
    SINCE_S = "since_s"

    # boolean sugar
    FALSE = "false"
    OR = "or"
    IMPLIES = "implies"
    IFF = "iff"

    # temporal sugar
    UNTIL = "until"
    SINCE = "since"
    UNTIL_C = "until_c"
    F = "F"
    G = "G"
    P = "P"
    H = "H"
    F_S = "F~"
    G_S = "G~"
    P_S = "P~"
    H_S = "H~"
    X = "X"
    X_S = "X~"
    Y = "Y"
    Y_S = "Y~"
    Z = "Z"
    Z_S = "Z~"

    # metric sugar, payload Interval
    M_F = "mF"
    M_G = "mG"
    M_P = "mP"
    M_H = "mH"
    M_F_S = "mF~"
    M_G_S = "mG~"
    M_P_S = "mP~"
    M_H_S = "mH~"
    M_U = "mU"
    M_S = "mS"
    M_U_S = "mU~"
    M_S_S = "mS~"
    EVENT_NEXT = "event_next"  # |>_I phi
    EVENT_LAST = "event_last"  # <|_I phi
    COUNT_NEXT = "count_next"  # args (phi, bound), payload k
    COUNT_LAST = "count_last"


TERM_KINDS = frozenset({
    Kind.NUM, Kind.VAR, Kind.PARAM, Kind.TIME, Kind.APPLY, Kind.ITE,
    Kind.AT_NEXT, Kind.AT_LAST, Kind.AT_NEXT_NS, Kind.AT_LAST_NS,
    Kind.AT_NEXT_ITER, Kind.AT_LAST_ITER, Kind.NEXT, Kind.PREV, Kind.SYM,
})
EF_KINDS = frozenset({
    Kind.AT_NEXT, Kind.AT_LAST, Kind.AT_NEXT_NS, Kind.AT_LAST_NS,
    Kind.AT_NEXT_ITER, Kind.AT_LAST_ITER,
})
FUTURE_EF_KINDS = frozenset({Kind.AT_NEXT, Kind.AT_NEXT_NS, Kind.AT_NEXT_ITER})
CORE_FORMULA_KINDS = frozenset({Kind.TRUE, Kind.PRED, Kind.NOT, Kind.AND, Kind.UNTIL_S, Kind.SINCE_S})
INTERVAL_KINDS = frozenset({
    Kind.M_F, Kind.M_G, Kind.M_P, Kind.M_H, Kind.M_F_S, Kind.M_G_S, Kind.M_P_S, Kind.M_H_S,
    Kind.M_U, Kind.M_S, Kind.M_U_S, Kind.M_S_S, Kind.EVENT_NEXT, Kind.EVENT_LAST,
})
METRIC_KINDS = INTERVAL_KINDS | {Kind.COUNT_NEXT, Kind.COUNT_LAST}
UNARY_TEMPORAL_KINDS = frozenset({
    Kind.F, Kind.G, Kind.P, Kind.H, Kind.F_S, Kind.G_S, Kind.P_S, Kind.H_S,
    Kind.X, Kind.X_S, Kind.Y, Kind.Y_S, Kind.Z, Kind.Z_S,
})
BINARY_TEMPORAL_KINDS = frozenset({Kind.UNTIL_S, Kind.SINCE_S, Kind.UNTIL, Kind.SINCE, Kind.UNTIL_C})
TEMPORAL_KINDS = UNARY_TEMPORAL_KINDS | BINARY_TEMPORAL_KINDS | METRIC_KINDS

ARITH_OPS = frozenset({"+", "-", "*", "neg"})
ORDER_OPS = frozenset({"<", "<=", ">", ">="})
PRED_OPS = ORDER_OPS | {"="}
FLIPPED_OP = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "=": "="}


# ============================================================================
# NODES AND HASH-CONSING
# ============================================================================

class Node:
    """Immutable syntax node. Compare with `is` or `==` (identity)."""

    __slots__ = ("kind", "args", "payload", "sort", "id", "__weakref__")

    def __init__(self, kind: Kind, args: Tuple["Node", ...], payload: Any, sort: Optional[Sort], node_id: int):
        self.kind = kind
        self.args = args
        self.payload = payload
        self.sort = sort
        self.id = node_id

    @property
    def is_formula(self) -> bool:
        return self.sort == BOOL

    @property
    def is_term(self) -> bool:
        return self.kind in TERM_KINDS

    def arg(self, index: int) -> "Node":
        return self.args[index]

    def __repr__(self) -> str:
        from core.printer import pretty
        try:
            return f"Node({pretty(self)})"
        except Exception:
            return f"Node({self.kind.value}#{self.id})"


class NodeManager:
    """Hash-consing table for Nodes.

    INVARIANTS:
    - make() returns the existing node for an existing (kind, args, payload, sort)
    - ids increase with creation order, so sorting by id is deterministic
    - ids are never reused; an entry lives only while its node is referenced
    """

    def __init__(self):
        self._table: "weakref.WeakValueDictionary[Tuple, Node]" = weakref.WeakValueDictionary()
        self._lock = threading.Lock()
        self._next_id = 0

    def make(self, kind: Kind, args: Sequence[Node] = (), payload: Any = None, sort: Optional[Sort] = None) -> Node:
        args = tuple(args)
        key = (kind, tuple(a.id for a in args), payload, sort)
        node = self._table.get(key)
        if node is not None:
            return node
        with self._lock:
            node = self._table.get(key)
            if node is None:
                node = Node(kind, args, payload, sort, self._next_id)
                self._next_id += 1
                self._table[key] = node
        return node

    def __len__(self) -> int:
        return len(self._table)


# Global node manager instance
_manager: Optional[NodeManager] = None


def get_manager() -> NodeManager:
    """Get global node manager"""
    global _manager
    if _manager is None:
        _manager = NodeManager()
    return _manager


def mk(kind: Kind, args: Sequence[Node] = (), payload: Any = None, sort: Optional[Sort] = None) -> Node:
    """Raw constructor, no simplification."""
    return get_manager().make(kind, args, payload, sort)


# ============================================================================
# INTERVALS
# ============================================================================

@dataclass(frozen=True)
class Interval:
    """Time interval with rigid endpoints; hi=None means unbounded above."""
    lo: Node
    hi: Optional[Node]
    lo_open: bool = False
    hi_open: bool = False

    def __post_init__(self):
        if self.hi is None and not self.hi_open:
            object.__setattr__(self, "hi_open", True)

    @classmethod
    def le(cls, a: Node) -> "Interval":
        return cls(num(0), a, False, False)

    @classmethod
    def lt(cls, a: Node) -> "Interval":
        return cls(num(0), a, False, True)

    @classmethod
    def ge(cls, a: Node) -> "Interval":
        return cls(a, None, False, True)

    @classmethod
    def gt(cls, a: Node) -> "Interval":
        return cls(a, None, True, True)

    @classmethod
    def eq(cls, a: Node) -> "Interval":
        return cls(a, a, False, False)

    @property
    def lo_is_zero(self) -> bool:
        return is_literal(self.lo, 0)

    @property
    def bounded(self) -> bool:
        return self.hi is not None

    def shorthand(self) -> Optional[Tuple[str, Node]]:
        """The `<=a` style form of this interval, when it has one."""
        if self.lo_is_zero and not self.lo_open and self.hi is not None:
            return ("<" if self.hi_open else "<=", self.hi)
        if self.hi is None:
            if self.lo_is_zero and not self.lo_open:
                return None
            return (">" if self.lo_open else ">=", self.lo)
        if self.hi is self.lo and not self.lo_open and not self.hi_open:
            return ("=", self.lo)
        return None

    def map(self, fn: Callable[[Node], Node]) -> "Interval":
        return Interval(fn(self.lo), fn(self.hi) if self.hi is not None else None, self.lo_open, self.hi_open)


# ============================================================================
# BUILDERS
# ============================================================================

def num(value: Any, sort: Sort = REAL) -> Node:
    return mk(Kind.NUM, (), Fraction(value), sort)


def var(name: str, sort: Sort = BOOL) -> Node:
    return mk(Kind.VAR, (), name, sort)


def param(name: str, sort: Sort = REAL) -> Node:
    return mk(Kind.PARAM, (), name, sort)


def time_() -> Node:
    return mk(Kind.TIME, (), None, REAL)


def apply(op: str, args: Sequence[Node], sort: Sort) -> Node:
    return mk(Kind.APPLY, args, op, sort)


def add(a: Node, b: Node) -> Node:
    return apply("+", (a, b), a.sort)


def sub(a: Node, b: Node) -> Node:
    return apply("-", (a, b), a.sort)


def mul(a: Node, b: Node) -> Node:
    return apply("*", (a, b), a.sort)


def neg(a: Node) -> Node:
    return apply("neg", (a,), a.sort)


def ite(cond: Node, then: Node, other: Node) -> Node:
    if cond.kind is Kind.TRUE:
        return then
    if then is other:
        return then
    return mk(Kind.ITE, (cond, then, other), None, then.sort)


def at_next(u: Node, phi: Node) -> Node:
    return mk(Kind.AT_NEXT, (u, phi), None, u.sort)


def at_last(u: Node, phi: Node) -> Node:
    return mk(Kind.AT_LAST, (u, phi), None, u.sort)


def at_next_ns(u: Node, phi: Node) -> Node:
    return mk(Kind.AT_NEXT_NS, (u, phi), None, u.sort)


def at_last_ns(u: Node, phi: Node) -> Node:
    return mk(Kind.AT_LAST_NS, (u, phi), None, u.sort)


def at_iter(kind: Kind, u: Node, phi: Node, k: int) -> Node:
    if k == 1:
        return at_next(u, phi) if kind is Kind.AT_NEXT_ITER else at_last(u, phi)
    return mk(kind, (u, phi), int(k), u.sort)


def next_(u: Node) -> Node:
    return mk(Kind.NEXT, (u,), None, u.sort)


def prev_(u: Node, default: str) -> Node:
    return mk(Kind.PREV, (u,), default, u.sort)


def true() -> Node:
    return mk(Kind.TRUE, (), None, BOOL)


def false() -> Node:
    return mk(Kind.FALSE, (), None, BOOL)


def pred(op: str, lhs: Node, rhs: Node) -> Node:
    return mk(Kind.PRED, (lhs, rhs), op, BOOL)


def not_(phi: Node) -> Node:
    if phi.kind is Kind.NOT:
        return phi.args[0]
    return mk(Kind.NOT, (phi,), None, BOOL)


def and_(a: Node, b: Node) -> Node:
    if a.kind is Kind.TRUE:
        return b
    if b.kind is Kind.TRUE:
        return a
    return mk(Kind.AND, (a, b), None, BOOL)


def or_(a: Node, b: Node) -> Node:
    return mk(Kind.OR, (a, b), None, BOOL)


def implies(a: Node, b: Node) -> Node:
    return mk(Kind.IMPLIES, (a, b), None, BOOL)


def iff(a: Node, b: Node) -> Node:
    return mk(Kind.IFF, (a, b), None, BOOL)


def unary(kind: Kind, phi: Node) -> Node:
    return mk(kind, (phi,), None, BOOL)


def binary(kind: Kind, a: Node, b: Node) -> Node:
    return mk(kind, (a, b), None, BOOL)


def until_s(a: Node, b: Node) -> Node:
    return binary(Kind.UNTIL_S, a, b)


def since_s(a: Node, b: Node) -> Node:
    return binary(Kind.SINCE_S, a, b)


def metric(kind: Kind, args: Sequence[Node], interval: Interval) -> Node:
    return mk(kind, args, interval, BOOL)


def count(kind: Kind, phi: Node, k: int, bound: Node) -> Node:
    return mk(kind, (phi, bound), int(k), BOOL)


def conj(items: Iterable[Node]) -> Node:
    """Balanced conjunction; true for an empty list."""
    items = [i for i in items if i.kind is not Kind.TRUE]
    if not items:
        return true()
    while len(items) > 1:
        items = [and_(items[i], items[i + 1]) if i + 1 < len(items) else items[i]
                 for i in range(0, len(items), 2)]
    return items[0]


def disj(items: Iterable[Node]) -> Node:
    """Balanced disjunction; false for an empty list."""
    items = list(items)
    if not items:
        return false()
    while len(items) > 1:
        items = [or_(items[i], items[i + 1]) if i + 1 < len(items) else items[i]
                 for i in range(0, len(items), 2)]
    return items[0]


def is_literal(node: Optional[Node], value: Any = None) -> bool:
    if node is None or node.kind is not Kind.NUM:
        return False
    return value is None or node.payload == Fraction(value)


def unfold_iter(node: Node) -> Node:
    """u@F~^k(phi) as k nested strict event-freezing terms."""
    u, phi = node.args
    strict = at_next if node.kind is Kind.AT_NEXT_ITER else at_last
    result = u
    for _ in range(node.payload):
        result = strict(result, phi)
    return result


def strict_counterpart(node: Node) -> Node:
    """The strict event-freezing node whose default a sugared one shares."""
    if node.kind is Kind.AT_NEXT_NS:
        return at_next(*node.args)
    if node.kind is Kind.AT_LAST_NS:
        return at_last(*node.args)
    if node.kind in (Kind.AT_NEXT_ITER, Kind.AT_LAST_ITER):
        return unfold_iter(node)
    return node


# ============================================================================
# SIGNATURE
# ============================================================================

@dataclass(frozen=True)
class FunctionDecl:
    name: str
    arg_sorts: Tuple[Sort, ...]
    result: Sort


@dataclass
class Signature:
    """Declared symbols plus the default-constant table for event-freezing terms."""
    sorts: Dict[str, Sort] = field(default_factory=dict)
    params: Dict[str, Sort] = field(default_factory=dict)
    functions: Dict[str, FunctionDecl] = field(default_factory=dict)
    state_vars: Dict[str, Sort] = field(default_factory=dict)
    defaults: Dict[Node, str] = field(default_factory=dict)
    aliases: Dict[Node, Node] = field(default_factory=dict)
    origins: Dict[str, Node] = field(default_factory=dict)
    _counter: int = 0

    # -- declarations -------------------------------------------------------

    def declared(self, name: str) -> bool:
        return (name in self.state_vars or name in self.params
                or name in self.functions or name in self.sorts)

    def _check_free(self, name: str) -> None:
        if self.declared(name):
            raise ValueError(f"'{name}' is already declared")

    def declare_var(self, name: str, sort: Sort) -> Node:
        self._check_free(name)
        self.state_vars[name] = sort
        return var(name, sort)

    def declare_param(self, name: str, sort: Sort) -> Node:
        self._check_free(name)
        self.params[name] = sort
        return param(name, sort)

    def declare_sort(self, name: str) -> Sort:
        self._check_free(name)
        sort = Sort(SortKind.UNINTERPRETED, name)
        self.sorts[name] = sort
        return sort

    def declare_function(self, name: str, arg_sorts: Sequence[Sort], result: Sort) -> FunctionDecl:
        self._check_free(name)
        decl = FunctionDecl(name, tuple(arg_sorts), result)
        self.functions[name] = decl
        return decl

    def sort_named(self, name: str) -> Optional[Sort]:
        return BUILTIN_SORTS.get(name) or self.sorts.get(name)

    # -- fresh symbols ------------------------------------------------------

    def fresh_name(self, prefix: str) -> str:
        while True:
            self._counter += 1
            name = f"{prefix}_{self._counter}"
            if not self.declared(name):
                return name

    def fresh_var(self, prefix: str, sort: Sort, origin: Optional[Node] = None) -> Node:
        name = self.fresh_name(prefix)
        self.state_vars[name] = sort
        if origin is not None:
            self.origins[name] = origin
        return var(name, sort)

    def fresh_param(self, prefix: str, sort: Sort) -> Node:
        name = self.fresh_name(prefix)
        self.params[name] = sort
        return param(name, sort)

    # -- event-freezing defaults -------------------------------------------

    def resolve(self, node: Node) -> Node:
        seen = set()
        while node not in seen:
            seen.add(node)
            if node in self.aliases:
                node = self.aliases[node]
            else:
                node = strict_counterpart(node)
        return node

    def alias_default(self, new: Node, original: Node) -> None:
        """Make `new` share the default constant of `original`."""
        if new is not original and new not in self.defaults:
            self.aliases.setdefault(new, original)

    def default_for(self, node: Node) -> str:
        """Name of the default parameter of an event-freezing term, created on first use."""
        canonical = self.resolve(node)
        name = self.defaults.get(canonical)
        if name is None:
            name = self.fresh_param("def", node.sort).payload
            self.defaults[canonical] = name
            logging.debug(f"Default {name} assigned to event-freezing term #{canonical.id}")
        return name

    def copy(self) -> "Signature":
        return Signature(dict(self.sorts), dict(self.params), dict(self.functions),
                         dict(self.state_vars), dict(self.defaults), dict(self.aliases),
                         dict(self.origins), self._counter)


# ============================================================================
# TRAVERSALS
# ============================================================================

def iter_dag(root: Node) -> Iterator[Node]:
    """Every distinct node below root, children before parents, left to right."""
    seen = set()
    stack: List[Tuple[Node, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            yield node
            continue
        if node.id in seen:
            continue
        seen.add(node.id)
        stack.append((node, True))
        for child in reversed(node.args):
            if child.id not in seen:
                stack.append((child, False))
        if isinstance(node.payload, Interval):
            for child in (node.payload.hi, node.payload.lo):
                if child is not None and child.id not in seen:
                    stack.append((child, False))


def subformulas(phi: Node) -> List[Node]:
    """All distinct subformulas of phi, phi included, children first."""
    return [n for n in iter_dag(phi) if n.sort == BOOL]


def node_count(phi: Node) -> int:
    return sum(1 for _ in iter_dag(phi))


class FreeSymbols(NamedTuple):
    state_vars: Tuple[str, ...]
    parameters: Tuple[str, ...]
    uses_time: bool


def free_symbols(phi: Node) -> FreeSymbols:
    """State variables, parameters and time usage of phi, in first-seen order."""
    state_vars: Dict[str, None] = {}
    params: Dict[str, None] = {}
    uses_time = False
    for node in iter_dag(phi):
        if node.kind is Kind.VAR:
            state_vars[node.payload] = None
        elif node.kind is Kind.PARAM:
            params[node.payload] = None
        elif node.kind is Kind.TIME:
            uses_time = True
    return FreeSymbols(tuple(state_vars), tuple(params), uses_time)


def contains_kind(phi: Node, kinds: Iterable[Kind]) -> bool:
    kinds = frozenset(kinds)
    return any(n.kind in kinds for n in iter_dag(phi))


class Rewriter:
    """Memoized bottom-up rewriting.

    Subclasses override rewrite(node, args) which receives the already
    rewritten children. Interval payloads are rewritten as well. With a
    Signature, a rebuilt event-freezing term inherits the default of the
    term it replaces.
    """

    def __init__(self, sig: Optional["Signature"] = None):
        self._memo: Dict[int, Node] = {}
        self.sig = sig

    def __call__(self, node: Node) -> Node:
        return self.walk(node)

    def walk(self, node: Node) -> Node:
        done = self._memo.get(node.id)
        if done is not None:
            return done
        args = tuple(self.walk(a) for a in node.args)
        result = self.rewrite(node, args)
        if (self.sig is not None and result is not node
                and node.kind in EF_KINDS and result.kind in EF_KINDS):
            self.sig.alias_default(result, node)
        self._memo[node.id] = result
        return result

    def rewrite(self, node: Node, args: Tuple[Node, ...]) -> Node:
        return rebuild(node, args, self.walk)


def rebuild(node: Node, args: Tuple[Node, ...], walk_term: Optional[Callable[[Node], Node]] = None) -> Node:
    """Node with new children, same kind, payload and sort."""
    payload = node.payload
    if isinstance(payload, Interval) and walk_term is not None:
        payload = payload.map(walk_term)
    if args == node.args and payload is node.payload:
        return node
    sort = node.sort
    if node.kind in (Kind.ITE,) and args:
        sort = args[1].sort
    return mk(node.kind, args, payload, sort)


def substitute(phi: Node, mapping: Dict[Node, Node], sig: Optional[Signature] = None) -> Node:
    """Replace whole subterms according to mapping (matched by identity)."""

    class _Substitute(Rewriter):
        def walk(self, node: Node) -> Node:
            if node in mapping:
                return mapping[node]
            return super().walk(node)

    return _Substitute(sig)(phi)


def is_rigid(term: Node) -> bool:
    """No state variables, no time and no event-freezing subterms."""
    return not any(n.kind in (Kind.VAR, Kind.TIME, Kind.NEXT, Kind.PREV, Kind.SYM) or n.kind in EF_KINDS
                   for n in iter_dag(term))


def is_time_term(term: Node) -> bool:
    """time, or an event-freezing term / ite built from time terms."""
    if term.kind is Kind.TIME:
        return True
    if term.kind in EF_KINDS:
        return is_time_term(term.args[0])
    if term.kind is Kind.ITE:
        return is_time_term(term.args[1]) and is_time_term(term.args[2])
    return False


def is_time_difference(term: Node) -> bool:
    return (term.kind is Kind.APPLY and term.payload == "-"
            and is_time_term(term.args[0]) and is_time_term(term.args[1]))


def mentions_time(term: Node) -> bool:
    """time occurs in the value of term (formula arguments are not inspected)."""
    if term.kind is Kind.TIME:
        return True
    if term.kind in EF_KINDS:
        return mentions_time(term.args[0])
    if term.kind is Kind.ITE:
        return mentions_time(term.args[1]) or mentions_time(term.args[2])
    if term.kind in (Kind.APPLY, Kind.NEXT, Kind.PREV):
        return any(mentions_time(a) for a in term.args)
    return False


def is_time_atom(node: Node) -> bool:
    return (node.kind is Kind.PRED and node.payload in ORDER_OPS
            and mentions_time(node.args[0]) and is_rigid(node.args[1]))


def temporal_depth(phi: Node) -> int:
    """Nesting depth of temporal operators and event-freezing terms."""
    depth: Dict[int, int] = {}
    for node in iter_dag(phi):
        inner = max((depth[a.id] for a in node.args), default=0)
        if node.kind in TEMPORAL_KINDS or node.kind in EF_KINDS or node.kind in (Kind.NEXT, Kind.PREV):
            inner += 1
        depth[node.id] = inner
    return depth[phi.id]
