"""Desugar - metric encodings and expansion to the core fragment

encode_metric rewrites metric, event-clock and counting operators into
event-freezing terms over `time`. expand rewrites every derived connective
into {true, pred, not, and, U~, S~} with strict @F~/@P~ terms.

INVARIANTS:
1. expand(expand(phi)) is expand(phi)
2. Rebuilt event-freezing terms keep the default constant of the term they translate
3. Rigid side conditions with literal endpoints are folded with exact rationals
"""

import logging
from fractions import Fraction
from typing import Optional, Tuple

from core import logic as L
from core.errors import EncodingError, StageError
from core.logic import Interval, Kind, Node, Signature, TimeModel


# ============================================================================
# EXPANSION
# ============================================================================

def _or(a: Node, b: Node) -> Node:
    return L.not_(L.and_(L.not_(a), L.not_(b)))


def _implies(a: Node, b: Node) -> Node:
    return L.not_(L.and_(a, L.not_(b)))


class _Expander(L.Rewriter):

    def __init__(self, sig: Optional[Signature]):
        super().__init__(sig)

    def _alias(self, new: Node, old: Node) -> Node:
        if self.sig is not None and new is not old:
            self.sig.alias_default(new, old)
        return new

    def rewrite(self, node: Node, args: Tuple[Node, ...]) -> Node:
        kind = node.kind
        T, FALSE = L.true(), L.not_(L.true())

        if kind in L.METRIC_KINDS:
            raise StageError(f"metric operator {kind.value} must be encoded before expansion")
        if kind is Kind.FALSE:
            return FALSE
        if kind is Kind.OR:
            return _or(*args)
        if kind is Kind.IMPLIES:
            return _implies(*args)
        if kind is Kind.IFF:
            a, b = args
            return L.and_(_implies(a, b), _implies(b, a))
        if kind is Kind.UNTIL:
            a, b = args
            return _or(b, L.and_(a, L.until_s(a, b)))
        if kind is Kind.SINCE:
            a, b = args
            return _or(b, L.and_(a, L.since_s(a, b)))
        if kind is Kind.UNTIL_C:
            a, b = args
            return self._until(a, _or(b, L.and_(a, self._x_strict(b))))
        if kind is Kind.F_S:
            return L.until_s(T, args[0])
        if kind is Kind.G_S:
            return L.not_(L.until_s(T, L.not_(args[0])))
        if kind is Kind.P_S:
            return L.since_s(T, args[0])
        if kind is Kind.H_S:
            return L.not_(L.since_s(T, L.not_(args[0])))
        if kind is Kind.F:
            return _or(args[0], L.until_s(T, args[0]))
        if kind is Kind.G:
            return L.and_(args[0], L.not_(L.until_s(T, L.not_(args[0]))))
        if kind is Kind.P:
            return _or(args[0], L.since_s(T, args[0]))
        if kind is Kind.H:
            return L.and_(args[0], L.not_(L.since_s(T, L.not_(args[0]))))
        if kind is Kind.X:
            return L.until_s(FALSE, args[0])
        if kind is Kind.X_S:
            return self._x_strict(args[0])
        if kind is Kind.Y:
            return L.since_s(FALSE, args[0])
        if kind is Kind.Y_S:
            return self._y_strict(args[0])
        if kind is Kind.Z:
            return _implies(self._has_past(), L.since_s(FALSE, args[0]))
        if kind is Kind.Z_S:
            return _implies(self._has_past(), self._y_strict(args[0]))

        if kind in (Kind.AT_NEXT_NS, Kind.AT_LAST_NS):
            u, phi = args
            strict = L.at_next(u, phi) if kind is Kind.AT_NEXT_NS else L.at_last(u, phi)
            self._alias(strict, L.strict_counterpart(node))
            return L.ite(phi, u, strict)
        if kind in (Kind.AT_NEXT_ITER, Kind.AT_LAST_ITER):
            u, phi = args
            make = L.at_next if kind is Kind.AT_NEXT_ITER else L.at_last
            original = L.unfold_iter(node)
            chain = []
            while len(chain) < node.payload:
                chain.append(original)
                original = original.args[0]
            result = u
            for old in reversed(chain):
                result = self._alias(make(result, phi), old)
            return result
        return L.rebuild(node, args)

    @staticmethod
    def _until(a: Node, b: Node) -> Node:
        return _or(b, L.and_(a, L.until_s(a, b)))

    @staticmethod
    def _x_strict(phi: Node) -> Node:
        FALSE = L.not_(L.true())
        return L.and_(L.until_s(phi, L.true()), L.not_(L.until_s(FALSE, L.true())))

    @staticmethod
    def _y_strict(phi: Node) -> Node:
        FALSE = L.not_(L.true())
        return L.and_(L.since_s(phi, L.true()), L.not_(L.since_s(FALSE, L.true())))

    @classmethod
    def _has_past(cls) -> Node:
        FALSE = L.not_(L.true())
        return _or(L.since_s(FALSE, L.true()), cls._y_strict(L.true()))


def expand(phi: Node, sig: Optional[Signature] = None) -> Node:
    """Core formula equivalent to phi; metric sugar must already be encoded."""
    return _Expander(sig)(phi)


# ============================================================================
# METRIC ENCODINGS
# ============================================================================

def _distance_next(phi: Node) -> Node:
    return L.sub(L.at_next(L.time_(), phi), L.time_())


def _distance_last(phi: Node) -> Node:
    return L.sub(L.time_(), L.at_last(L.time_(), phi))


def _cmp(op: str, lhs: Node, rhs: Node) -> Node:
    return L.pred(op, lhs, rhs)


def _fold(op: str, a: Node, b: Node) -> Node:
    """Rigid comparison, folded to true/false when both sides are literals."""
    if L.is_literal(a) and L.is_literal(b):
        x, y = a.payload, b.payload
        holds = {"<": x < y, "<=": x <= y, ">": x > y, ">=": x >= y, "=": x == y}[op]
        return L.true() if holds else L.false()
    return L.pred(op, a, b)


def zero_in(interval: Interval) -> Node:
    zero = L.num(0)
    lower = _fold("<" if interval.lo_open else "<=", interval.lo, zero)
    if interval.hi is None:
        return lower
    upper = _fold("<" if interval.hi_open else "<=", zero, interval.hi)
    return _and_folded(lower, upper)


def _and_folded(a: Node, b: Node) -> Node:
    if a.kind is Kind.FALSE or b.kind is Kind.FALSE:
        return L.false()
    return L.and_(a, b)


def _or_folded(a: Node, b: Node) -> Node:
    if a.kind is Kind.FALSE:
        return b
    if b.kind is Kind.FALSE:
        return a
    if a.kind is Kind.TRUE or b.kind is Kind.TRUE:
        return L.true()
    return L.or_(a, b)


def in_interval(distance: Node, interval: Interval) -> Node:
    """distance in interval, as one or two time atoms."""
    atoms = [_cmp(">" if interval.lo_open else ">=", distance, interval.lo)]
    if interval.hi is not None:
        atoms.append(_cmp("<" if interval.hi_open else "<=", distance, interval.hi))
    return L.conj(atoms)


class _MetricEncoder(L.Rewriter):
    """Bottom-up encoding; arguments are already free of metric operators."""

    def __init__(self, model: TimeModel, sig: Optional[Signature] = None):
        super().__init__(sig)
        self.model = model

    def rewrite(self, node: Node, args: Tuple[Node, ...]) -> Node:
        kind = node.kind
        if kind not in L.METRIC_KINDS:
            return L.rebuild(node, args, self.walk)
        interval = node.payload.map(self.walk) if isinstance(node.payload, Interval) else None

        if kind is Kind.M_F_S:
            return self.future(args[0], interval)
        if kind is Kind.M_G_S:
            return L.not_(self.future(L.not_(args[0]), interval))
        if kind is Kind.M_F:
            return _or_folded(_and_folded(zero_in(interval), args[0]), self.future(args[0], interval))
        if kind is Kind.M_G:
            inner = _or_folded(_and_folded(zero_in(interval), L.not_(args[0])),
                               self.future(L.not_(args[0]), interval))
            return L.not_(inner)
        if kind is Kind.M_P_S:
            return self.past(args[0], interval)
        if kind is Kind.M_H_S:
            return L.not_(self.past(L.not_(args[0]), interval))
        if kind is Kind.M_P:
            return _or_folded(_and_folded(zero_in(interval), args[0]), self.past(args[0], interval))
        if kind is Kind.M_H:
            inner = _or_folded(_and_folded(zero_in(interval), L.not_(args[0])),
                               self.past(L.not_(args[0]), interval))
            return L.not_(inner)
        if kind is Kind.M_U_S:
            return self.until(args[0], args[1], interval)
        if kind is Kind.M_U:
            a, b = args
            return _or_folded(_and_folded(zero_in(interval), b), L.and_(a, self.until(a, b, interval)))
        if kind is Kind.M_S_S:
            return self.since(args[0], args[1], interval)
        if kind is Kind.M_S:
            a, b = args
            return _or_folded(_and_folded(zero_in(interval), b), L.and_(a, self.since(a, b, interval)))
        if kind is Kind.EVENT_NEXT:
            phi = args[0]
            return L.and_(in_interval(_distance_next(phi), interval), L.until_s(L.not_(phi), phi))
        if kind is Kind.EVENT_LAST:
            phi = args[0]
            return L.and_(in_interval(_distance_last(phi), interval), L.since_s(L.not_(phi), phi))
        if kind is Kind.COUNT_NEXT:
            phi, bound = args
            distance = L.sub(L.at_iter(Kind.AT_NEXT_ITER, L.time_(), phi, node.payload), L.time_())
            return L.and_(_cmp("<", distance, bound), self._nested(L.unary(Kind.F_S, phi), phi, node.payload, Kind.F_S))
        if kind is Kind.COUNT_LAST:
            phi, bound = args
            distance = L.sub(L.time_(), L.at_iter(Kind.AT_LAST_ITER, L.time_(), phi, node.payload))
            return L.and_(_cmp("<", distance, bound), self._nested(L.unary(Kind.P_S, phi), phi, node.payload, Kind.P_S))
        raise EncodingError(f"no encoding for {kind.value}")

    @staticmethod
    def _nested(first: Node, phi: Node, k: int, op: Kind) -> Node:
        result = first
        for _ in range(k - 1):
            result = L.unary(op, L.and_(phi, result))
        return result

    # -- building blocks ----------------------------------------------------

    def _block_end(self) -> Optional[Node]:
        """Holds at the last point of the current timestamp block."""
        if self.model is TimeModel.DISCRETE:
            return _cmp(">", _distance_next(L.true()), L.num(0))
        if self.model is TimeModel.SUPER_DENSE:
            return L.unary(Kind.X_S, L.true())
        return None

    def _block_start(self) -> Optional[Node]:
        """Holds at the first point of the current timestamp block."""
        first = L.not_(L.unary(Kind.Y, L.true()))
        if self.model is TimeModel.DISCRETE:
            return L.or_(_cmp(">", _distance_last(L.true()), L.num(0)), first)
        if self.model is TimeModel.SUPER_DENSE:
            return L.or_(L.unary(Kind.Y_S, L.true()), first)
        return None

    def _future_upto(self, phi: Node, bound: Node, open_end: bool) -> Node:
        """F~_[0,bound] phi, or F~_[0,bound) phi when open_end."""
        d = _distance_next(phi)
        exists = L.unary(Kind.F_S, phi)
        if open_end:
            return L.and_(exists, _cmp("<", d, bound))
        if self.model is TimeModel.DISCRETE:
            return L.and_(exists, _cmp("<=", d, bound))
        attained = L.until_s(L.not_(phi), phi)
        return L.and_(exists, L.or_(L.and_(attained, _cmp("<=", d, bound)),
                                    L.and_(L.not_(attained), _cmp("<", d, bound))))

    def _past_upto(self, phi: Node, bound: Node, open_end: bool) -> Node:
        d = _distance_last(phi)
        exists = L.unary(Kind.P_S, phi)
        if open_end:
            return L.and_(exists, _cmp("<", d, bound))
        if self.model is TimeModel.DISCRETE:
            return L.and_(exists, _cmp("<=", d, bound))
        attained = L.since_s(L.not_(phi), phi)
        return L.and_(exists, L.or_(L.and_(attained, _cmp("<=", d, bound)),
                                    L.and_(L.not_(attained), _cmp("<", d, bound))))

    def _shift_to_block_end(self, closed: Node, guard: Node = None) -> Node:
        """Evaluate `closed` at the last point sharing the current timestamp."""
        end = self._block_end()
        if end is None:
            return closed
        stay = L.not_(end) if guard is None else L.and_(guard, L.not_(end))
        target = L.and_(end, closed) if guard is None else L.and_(end, L.and_(guard, closed))
        return L.or_(L.and_(end, closed), L.and_(L.not_(end), L.until_s(stay, target)))

    def _shift_to_block_start(self, closed: Node, guard: Node = None) -> Node:
        start = self._block_start()
        if start is None:
            return closed
        stay = L.not_(start) if guard is None else L.and_(guard, L.not_(start))
        target = L.and_(start, closed) if guard is None else L.and_(start, L.and_(guard, closed))
        return L.or_(L.and_(start, closed), L.and_(L.not_(start), L.since_s(stay, target)))

    # -- future -------------------------------------------------------------

    def future(self, phi: Node, interval: Interval) -> Node:
        """F~_I phi."""
        if interval.lo_is_zero:
            if interval.hi is None:
                closed = L.unary(Kind.F_S, phi)
            else:
                closed = self._future_upto(phi, interval.hi, interval.hi_open)
            return self._shift_to_block_end(closed) if interval.lo_open else closed
        if interval.hi is None:
            return L.not_(self.globally_after(L.not_(phi), interval.lo, interval.lo_open))
        raise EncodingError(f"interval {_describe(interval)} is neither zero-anchored nor unbounded")

    def globally_after(self, psi: Node, a: Node, strict_bound: bool) -> Node:
        """G~_{>a} psi when strict_bound, else G~_{>=a} psi."""
        g = L.unary(Kind.G_S, psi)
        if strict_bound:
            return L.or_(g, self._future_upto(g, a, False))
        if self.model is TimeModel.DISCRETE:
            return L.or_(g, self._future_upto(g, a, True))
        onset = L.and_(L.unary(Kind.G, psi), L.unary(Kind.Y_S, L.true()))
        return L.or_(g, self._future_upto(onset, a, False))

    def until(self, a: Node, b: Node, interval: Interval) -> Node:
        """a U~_I b."""
        base = L.until_s(a, b)
        if interval.lo_is_zero:
            if interval.hi is None:
                closed = base
            else:
                closed = L.and_(base, self._future_upto(b, interval.hi, interval.hi_open))
            return self._shift_to_block_end(closed, guard=a) if interval.lo_open else closed
        if interval.hi is None and self.model is TimeModel.DISCRETE:
            # phi1 holds and phi2 stays pending until the lower bound has passed
            below = Interval(L.num(0), interval.lo, False, not interval.lo_open)
            g1 = L.not_(self.future(L.not_(a), below))
            g2 = L.not_(self.future(L.not_(base), below))
            return L.and_(L.and_(g1, g2), base)
        raise EncodingError(f"until over {_describe(interval)} is outside the encodable fragment "
                            f"for {self.model.value} time")

    # -- past ---------------------------------------------------------------

    def past(self, phi: Node, interval: Interval) -> Node:
        """P~_I phi."""
        if interval.lo_is_zero:
            if interval.hi is None:
                closed = L.unary(Kind.P_S, phi)
            else:
                closed = self._past_upto(phi, interval.hi, interval.hi_open)
            return self._shift_to_block_start(closed) if interval.lo_open else closed
        if interval.hi is None:
            return L.not_(self.historically_after(L.not_(phi), interval.lo, interval.lo_open))
        raise EncodingError(f"interval {_describe(interval)} is neither zero-anchored nor unbounded")

    def historically_after(self, psi: Node, a: Node, strict_bound: bool) -> Node:
        """H~_{>a} psi when strict_bound, else H~_{>=a} psi."""
        h = L.unary(Kind.H_S, psi)
        if strict_bound:
            return L.or_(h, self._past_upto(h, a, False))
        if self.model is TimeModel.DISCRETE:
            return L.or_(h, self._past_upto(h, a, True))
        onset = L.and_(L.unary(Kind.H, psi), L.unary(Kind.X_S, L.true()))
        return L.or_(L.or_(_cmp("<", L.time_(), a), h), self._past_upto(onset, a, False))

    def since(self, a: Node, b: Node, interval: Interval) -> Node:
        """a S~_I b."""
        base = L.since_s(a, b)
        if interval.lo_is_zero:
            if interval.hi is None:
                closed = base
            else:
                closed = L.and_(base, self._past_upto(b, interval.hi, interval.hi_open))
            return self._shift_to_block_start(closed, guard=a) if interval.lo_open else closed
        if interval.hi is None and self.model is TimeModel.DISCRETE:
            below = Interval(L.num(0), interval.lo, False, not interval.lo_open)
            h1 = L.not_(self.past(L.not_(a), below))
            h2 = L.not_(self.past(L.not_(base), below))
            return L.and_(L.and_(h1, h2), base)
        raise EncodingError(f"since over {_describe(interval)} is outside the encodable fragment "
                            f"for {self.model.value} time")


def _describe(interval: Interval) -> str:
    from core.printer import format_interval
    return format_interval(interval)


def encode_metric(phi: Node, model: TimeModel = TimeModel.DENSE, sig: Optional[Signature] = None) -> Node:
    """phi without metric, event-clock or counting operators."""
    result = _MetricEncoder(model, sig)(phi)
    logging.debug(f"Metric encoding ({model.value}): {L.node_count(phi)} -> {L.node_count(result)} nodes")
    return result


def to_core(phi: Node, model: TimeModel = TimeModel.DENSE, sig: Optional[Signature] = None) -> Node:
    """encode_metric followed by expand."""
    return expand(encode_metric(phi, model, sig), sig)
