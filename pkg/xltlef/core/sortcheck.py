"""Sort Checker - turns raw parse trees into sorted XLTL-EF nodes

Resolves identifiers against a Signature, assigns sorts, checks arities,
rigidity of interval endpoints and the shape of time atoms.

INVARIANTS:
1. All errors are collected; SortError carries every diagnostic found
2. `time` survives only inside time atoms `tu ~ cu` or `tu - tu' ~ cu`
3. Every event-freezing term in the result has a default in the Signature
"""

import logging
from typing import Dict, List, Optional, Tuple

from core.errors import Diagnostic, SortError
from core import logic as L
from core.logic import Kind, Node, Signature, Sort

_BAD = L.mk(Kind.SYM, (), "<error>", None)


class _SortChecker:
    """One pass over a raw tree. Not reusable across inputs."""

    def __init__(self, sig: Signature, positions: Optional[Dict[Node, Tuple[int, int]]],
                 allow_next: bool, pedantic: bool):
        self.sig = sig
        self.positions = positions or {}
        self.allow_next = allow_next
        self.pedantic = pedantic
        self.errors: List[Diagnostic] = []
        self.warnings: List[Diagnostic] = []
        self._formulas: Dict[int, Node] = {}
        self._terms: Dict[int, Node] = {}

    # -- diagnostics --------------------------------------------------------

    def _where(self, node: Node) -> Tuple[int, int]:
        if node in self.positions:
            return self.positions[node]
        for child in node.args:
            if child in self.positions:
                return self.positions[child]
        return (0, 0)

    def error(self, node: Node, message: str) -> Node:
        line, col = self._where(node)
        self.errors.append(Diagnostic(line, col, message))
        return _BAD

    def warn(self, node: Node, message: str) -> None:
        line, col = self._where(node)
        self.warnings.append(Diagnostic(line, col, message, severity="warning"))

    # -- formulas -----------------------------------------------------------

    def formula(self, raw: Node) -> Node:
        done = self._formulas.get(raw.id)
        if done is None:
            done = self._formula(raw)
            self._formulas[raw.id] = done
        return done

    def _formula(self, raw: Node) -> Node:
        kind = raw.kind
        if kind in (Kind.TRUE, Kind.FALSE):
            return raw
        if kind is Kind.PRED:
            return self._pred(raw)
        if kind in L.TERM_KINDS:
            term = self.term(raw)
            if term is _BAD:
                return _BAD
            if term.sort != L.BOOL:
                return self.error(raw, f"expected a formula, found a {term.sort} term")
            return term

        if kind in (Kind.COUNT_NEXT, Kind.COUNT_LAST):
            args = [self.formula(raw.args[0]), self.rigid(raw.args[1], "counting bound")]
        else:
            args = [self.formula(a) for a in raw.args]
        if any(a is _BAD for a in args):
            return _BAD

        if kind is Kind.NOT:
            return L.not_(args[0])
        if kind is Kind.AND:
            return L.and_(*args)
        if kind in (Kind.OR, Kind.IMPLIES, Kind.IFF) or kind in L.UNARY_TEMPORAL_KINDS \
                or kind in L.BINARY_TEMPORAL_KINDS:
            return L.mk(kind, args, None, L.BOOL)
        if kind in L.INTERVAL_KINDS:
            interval = self._interval(raw, raw.payload)
            if interval is None:
                return _BAD
            return L.metric(kind, args, interval)
        if kind in (Kind.COUNT_NEXT, Kind.COUNT_LAST):
            if raw.payload < 1:
                return self.error(raw, "counting index must be at least 1")
            return L.count(kind, args[0], raw.payload, args[1])
        return self.error(raw, f"unexpected {kind.value} in formula position")

    def _interval(self, raw: Node, interval: L.Interval) -> Optional[L.Interval]:
        lo = self.rigid(interval.lo, "interval endpoint")
        hi = self.rigid(interval.hi, "interval endpoint") if interval.hi is not None else None
        if lo is _BAD or hi is _BAD:
            return None
        if L.is_literal(lo) and L.is_literal(hi):
            lo_v, hi_v = lo.payload, hi.payload
            if lo_v > hi_v or (lo_v == hi_v and (interval.lo_open or interval.hi_open)):
                self.error(raw, "empty interval")
                return None
        if L.is_literal(lo) and lo.payload < 0:
            self.error(raw, "interval endpoints must not be negative")
            return None
        return L.Interval(lo, hi, interval.lo_open, interval.hi_open)

    def _pred(self, raw: Node) -> Node:
        op = raw.payload
        lhs, rhs = self.term(raw.args[0]), self.term(raw.args[1])
        if lhs is _BAD or rhs is _BAD:
            return _BAD
        lhs, rhs = self._unify(raw, lhs, rhs)
        if lhs is _BAD:
            return _BAD

        timed = L.mentions_time(lhs) or L.mentions_time(rhs)
        if op in ("=", "!="):
            if timed:
                return self.error(raw, "time terms are compared with <, <=, > or >=, not with =")
            atom = L.pred("=", lhs, rhs)
            return L.not_(atom) if op == "!=" else atom

        if not lhs.sort.is_numeric:
            return self.error(raw, f"ordering comparison on non-numeric sort {lhs.sort}")
        if timed:
            if self._time_side(lhs) and L.is_rigid(rhs):
                pass
            elif self._time_side(rhs) and L.is_rigid(lhs):
                lhs, rhs, op = rhs, lhs, L.FLIPPED_OP[op]
            else:
                return self.error(raw, "time comparison must have the form 'tu ~ c' or 'tu - tu ~ c' with a rigid c")
            if lhs.sort != L.REAL:
                return self.error(raw, "time comparisons need a real-sorted bound")
            if self.pedantic and L.is_time_difference(lhs):
                self.warn(raw, "difference time atom outside the basic time-atom grammar")
        return L.pred(op, lhs, rhs)

    @staticmethod
    def _time_side(term: Node) -> bool:
        return L.is_time_term(term) or L.is_time_difference(term)

    # -- terms --------------------------------------------------------------

    def term(self, raw: Node) -> Node:
        done = self._terms.get(raw.id)
        if done is None:
            done = self._term(raw)
            self._terms[raw.id] = done
        return done

    def _term(self, raw: Node) -> Node:
        kind = raw.kind
        if kind is Kind.NUM:
            return raw if raw.sort is not None else L.num(raw.payload, L.REAL)
        if kind in (Kind.VAR, Kind.PARAM):
            return raw
        if kind is Kind.TIME:
            return L.time_()
        if kind is Kind.SYM:
            return self._symbol(raw)
        if kind is Kind.APPLY:
            if raw.payload in L.ARITH_OPS:
                return self._arith(raw)
            return self._call(raw)
        if kind is Kind.ITE:
            cond = self.formula(raw.args[0])
            then, other = self.term(raw.args[1]), self.term(raw.args[2])
            if _BAD in (cond, then, other):
                return _BAD
            then, other = self._unify(raw, then, other)
            if then is _BAD:
                return _BAD
            return L.ite(cond, then, other)
        if kind in L.EF_KINDS:
            u, phi = self.term(raw.args[0]), self.formula(raw.args[1])
            if u is _BAD or phi is _BAD:
                return _BAD
            if kind in (Kind.AT_NEXT_ITER, Kind.AT_LAST_ITER):
                if raw.payload < 1:
                    return self.error(raw, "iteration count must be at least 1")
                return L.at_iter(kind, u, phi, raw.payload)
            return L.mk(kind, (u, phi), None, u.sort)
        if kind in (Kind.NEXT, Kind.PREV):
            if not self.allow_next or kind is Kind.PREV:
                return self.error(raw, f"{kind.value}(...) is not part of the input language")
            inner = self.term(raw.args[0])
            return _BAD if inner is _BAD else L.next_(inner)
        return self.error(raw, f"unexpected {kind.value} in term position")

    def _symbol(self, raw: Node) -> Node:
        name = raw.payload
        sig = self.sig
        if name in sig.state_vars:
            return L.var(name, sig.state_vars[name])
        if name in sig.params:
            return L.param(name, sig.params[name])
        if name in sig.functions:
            decl = sig.functions[name]
            if decl.arg_sorts:
                return self.error(raw, f"arity mismatch for {name}: expected {len(decl.arg_sorts)}, got 0")
            return L.apply(name, (), decl.result)
        return self.error(raw, f"unknown symbol '{name}'")

    def _arith(self, raw: Node) -> Node:
        args = [self.term(a) for a in raw.args]
        if _BAD in args:
            return _BAD
        if len(args) == 2:
            lhs, rhs = self._unify(raw, args[0], args[1])
            if lhs is _BAD:
                return _BAD
            args = [lhs, rhs]
        sort = args[0].sort
        if not sort.is_numeric:
            return self.error(raw, f"arithmetic on non-numeric sort {sort}")
        if raw.payload == "neg" and L.is_literal(args[0]):
            return L.num(-args[0].payload, sort)
        return L.apply(raw.payload, args, sort)

    def _call(self, raw: Node) -> Node:
        name = raw.payload
        decl = self.sig.functions.get(name)
        if decl is None:
            return self.error(raw, f"unknown function '{name}'")
        if len(raw.args) != len(decl.arg_sorts):
            return self.error(raw, f"arity mismatch for {name}: expected {len(decl.arg_sorts)}, got {len(raw.args)}")
        args = []
        for index, (arg, expected) in enumerate(zip(raw.args, decl.arg_sorts), start=1):
            term = self.term(arg)
            if term is _BAD:
                return _BAD
            term = self._coerce(term, expected)
            if term.sort != expected:
                return self.error(raw, f"argument {index} of {name}: expected {expected}, got {term.sort}")
            if L.mentions_time(term):
                return self.error(raw, f"time may not be passed to function {name}")
            args.append(term)
        return L.apply(name, args, decl.result)

    def rigid(self, raw: Node, what: str) -> Node:
        term = self.term(raw)
        if term is _BAD:
            return _BAD
        if not L.is_rigid(term):
            return self.error(raw, f"rigid {what} required (no state variables, time or event-freezing terms)")
        term = self._coerce(term, L.REAL)
        if term.sort != L.REAL:
            return self.error(raw, f"{what} must be real, got {term.sort}")
        return term

    # -- sort unification ---------------------------------------------------

    @staticmethod
    def _coerce(term: Node, sort: Sort) -> Node:
        if term.sort == sort or not L.is_literal(term):
            return term
        if sort == L.INT and term.payload.denominator == 1:
            return L.num(term.payload, L.INT)
        if sort == L.REAL:
            return L.num(term.payload, L.REAL)
        return term

    def _unify(self, raw: Node, lhs: Node, rhs: Node) -> Tuple[Node, Node]:
        if lhs.sort != rhs.sort:
            lhs, rhs = self._coerce(lhs, rhs.sort), self._coerce(rhs, lhs.sort)
        if lhs.sort != rhs.sort:
            self.error(raw, f"sort mismatch: {lhs.sort} vs {rhs.sort}")
            return _BAD, _BAD
        return lhs, rhs


def register_defaults(phi: Node, sig: Signature) -> None:
    """Create the default constant of every event-freezing term in phi."""
    for node in L.iter_dag(phi):
        if node.kind in (Kind.AT_NEXT_ITER, Kind.AT_LAST_ITER):
            target = L.unfold_iter(node)
            for _ in range(node.payload):
                sig.default_for(target)
                target = target.args[0]
        elif node.kind in L.EF_KINDS:
            sig.default_for(node)


def sort_check(raw: Node, sig: Signature, positions: Optional[Dict[Node, Tuple[int, int]]] = None,
               allow_next: bool = False, pedantic: bool = False,
               warnings: Optional[List[Diagnostic]] = None, source: str = "<input>") -> Node:
    """Sorted formula for a raw parse tree; raises SortError listing every problem."""
    checker = _SortChecker(sig, positions, allow_next, pedantic)
    result = checker.formula(raw)
    if checker.errors:
        raise SortError(checker.errors, source)
    if warnings is not None:
        warnings.extend(checker.warnings)
    register_defaults(result, sig)
    logging.debug(f"Sort check passed: {L.node_count(result)} nodes")
    return result
