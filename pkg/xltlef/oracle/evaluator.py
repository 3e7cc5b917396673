"""Evaluator - ground-truth semantics on lasso traces

eval_discrete / eval_term read a DiscreteLassoTrace directly: every
operator, including metric, event-clock and counting sugar, has its own
semantics here so the encodings can be tested against it.

eval_dense reads an IntervalTrace. Formulas are first brought to the core
fragment (encode_metric + expand) for the trace's time model; the
evaluator then works on segments (singular points and open intervals) and
splits an open segment wherever a time atom changes its truth value, so
every formula is constant on every open segment it is evaluated on.

INVARIANTS:
1. Evaluation is exact: rationals only, no floating point
2. Eventual periodicity bounds every scan: beyond the horizon all subformula
   values repeat with the loop, so one more loop decides a future search
3. Event-freezing terms with no matching point return their default parameter
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, NamedTuple, Optional, Tuple, Union

from core import logic as L
from core.desugar import encode_metric, expand
from core.errors import TraceError
from core.logic import Interval, Kind, Node, Signature, TimeModel
from oracle.traces import DiscreteLassoTrace, IntervalTrace, Value


class Affine(NamedTuple):
    """a * t + b on an open segment."""
    a: Fraction
    b: Fraction

    def at(self, t: Fraction) -> Fraction:
        return self.a * t + self.b


Num = Union[Fraction, Affine]


def _affine(x: Num) -> Affine:
    return x if isinstance(x, Affine) else Affine(Fraction(0), Fraction(x))


def _plain(x: Affine) -> Num:
    return x.b if x.a == 0 else x


def _add(x: Num, y: Num) -> Num:
    if isinstance(x, Affine) or isinstance(y, Affine):
        x, y = _affine(x), _affine(y)
        return _plain(Affine(x.a + y.a, x.b + y.b))
    return x + y


def _neg(x: Num) -> Num:
    if isinstance(x, Affine):
        return Affine(-x.a, -x.b)
    return -x


def _mul(x: Num, y: Num) -> Num:
    if isinstance(x, Affine) and isinstance(y, Affine):
        raise TraceError("product of two time-dependent values")
    if isinstance(x, Affine):
        return _plain(Affine(x.a * y, x.b * y))
    if isinstance(y, Affine):
        return _plain(Affine(y.a * x, y.b * x))
    return x * y


_COMPARE = {
    "=": lambda d: d == 0,
    "<": lambda d: d < 0,
    "<=": lambda d: d <= 0,
    ">": lambda d: d > 0,
    ">=": lambda d: d >= 0,
}


def _default_of(sort) -> Value:
    return False if sort == L.BOOL else Fraction(0)


# ============================================================================
# SHARED EVALUATION
# ============================================================================

class _Evaluator:
    """Memoized evaluation of formulas and terms at integer positions."""

    def __init__(self, sig: Optional[Signature], params: Dict[str, Value],
                 functions: Dict[str, Dict[Tuple[Value, ...], Value]]):
        self.sig = sig.copy() if sig is not None else Signature()
        self.params = params
        self.functions = functions
        self._memo: Dict[Tuple[int, int], Any] = {}
        self.horizon = 0
        self.reach = 1

    def _set_horizon(self, phi: Node, length: int, loop_length: int, shift: Fraction) -> None:
        magnitude = Fraction(1)
        for node in L.iter_dag(phi):
            if node.kind is Kind.NUM:
                magnitude += abs(node.payload)
        for value in self.params.values():
            if not isinstance(value, bool):
                magnitude += abs(value)
        rounds = math.ceil(magnitude / shift) + 1 if shift > 0 else 1
        self.reach = loop_length * (rounds + 1)
        self.horizon = max(self.horizon, length + self.reach * (L.temporal_depth(phi) + 1))

    def limit(self, entry: int) -> int:
        return max(entry, self.horizon) + self.reach

    # -- dispatch -----------------------------------------------------------

    def formula(self, node: Node, i: int) -> bool:
        key = (node.id, i)
        hit = self._memo.get(key)
        if hit is None:
            hit = bool(self._formula(node, i))
            self._memo[key] = hit
        return hit

    def term(self, node: Node, i: int) -> Any:
        key = (node.id, i)
        hit = self._memo.get(key)
        if hit is None:
            hit = self._term(node, i)
            self._memo[key] = hit
        return hit

    def _formula(self, node: Node, i: int) -> bool:
        kind = node.kind
        if kind is Kind.TRUE:
            return True
        if kind is Kind.FALSE:
            return False
        if kind is Kind.NOT:
            return not self.formula(node.args[0], i)
        if kind is Kind.AND:
            return self.formula(node.args[0], i) and self.formula(node.args[1], i)
        if kind is Kind.OR:
            return self.formula(node.args[0], i) or self.formula(node.args[1], i)
        if kind is Kind.IMPLIES:
            return not self.formula(node.args[0], i) or self.formula(node.args[1], i)
        if kind is Kind.IFF:
            return self.formula(node.args[0], i) == self.formula(node.args[1], i)
        if kind is Kind.PRED:
            return self.compare(node, i)
        if kind in L.TERM_KINDS:
            return bool(self.term(node, i))
        return self.temporal(node, i)

    def _term(self, node: Node, i: int) -> Any:
        kind = node.kind
        if kind is Kind.NUM:
            return node.payload
        if kind is Kind.VAR:
            return self.state_value(i, node.payload, node.sort)
        if kind is Kind.PARAM:
            return self.param_value(node.payload, node.sort)
        if kind is Kind.TIME:
            return self.time(i)
        if kind is Kind.ITE:
            cond, then, other = node.args
            return self.term(then, i) if self.formula(cond, i) else self.term(other, i)
        if kind is Kind.APPLY:
            return self._apply(node, i)
        if kind is Kind.SYM:
            raise TraceError(f"unresolved symbol '{node.payload}'")
        return self.step_term(node, i)

    def _apply(self, node: Node, i: int) -> Any:
        op = node.payload
        if op == "+":
            return _add(self.term(node.args[0], i), self.term(node.args[1], i))
        if op == "-":
            return _add(self.term(node.args[0], i), _neg(self.term(node.args[1], i)))
        if op == "*":
            return _mul(self.term(node.args[0], i), self.term(node.args[1], i))
        if op == "neg":
            return _neg(self.term(node.args[0], i))
        args = tuple(self.term(a, i) for a in node.args)
        if any(isinstance(a, Affine) for a in args):
            raise TraceError(f"time-dependent argument to {op}")
        table = self.functions.get(op, {})
        if args in table:
            return table[args]
        return _default_of(node.sort)

    def compare(self, node: Node, i: int) -> bool:
        lhs, rhs = self.term(node.args[0], i), self.term(node.args[1], i)
        if isinstance(lhs, bool) or isinstance(rhs, bool):
            if node.payload != "=":
                raise TraceError(f"ordering on booleans in {node!r}")
            return bool(lhs) == bool(rhs)
        return _COMPARE[node.payload](self.difference(_add(lhs, _neg(rhs)), i))

    def difference(self, d: Num, i: int) -> Fraction:
        if isinstance(d, Affine):
            raise TraceError("time-dependent value at a discrete position")
        return d

    def param_value(self, name: str, sort) -> Value:
        value = self.params.get(name)
        return _default_of(sort) if value is None else value

    def default_value(self, node: Node) -> Value:
        return self.param_value(self.sig.default_for(node), node.sort)

    def rigid(self, node: Node) -> Fraction:
        value = self.term(node, 0)
        if isinstance(value, Affine):
            raise TraceError("interval bound is not rigid")
        return value

    # -- position-specific hooks -------------------------------------------

    def state_value(self, i: int, name: str, sort) -> Value:
        raise NotImplementedError

    def time(self, i: int) -> Num:
        raise NotImplementedError

    def temporal(self, node: Node, i: int) -> bool:
        raise NotImplementedError

    def step_term(self, node: Node, i: int) -> Any:
        raise NotImplementedError


def _in_interval(d: Fraction, lo: Fraction, hi: Optional[Fraction], interval: Interval) -> bool:
    if d < lo or (interval.lo_open and d == lo):
        return False
    if hi is None:
        return True
    return d < hi or (not interval.hi_open and d == hi)


# ============================================================================
# DISCRETE LASSOS
# ============================================================================

class DiscreteEvaluator(_Evaluator):
    """Direct semantics of every operator on a DiscreteLassoTrace."""

    def __init__(self, trace: DiscreteLassoTrace, sig: Optional[Signature] = None):
        super().__init__(sig, trace.params, trace.functions)
        self.trace = trace

    def prepare(self, phi: Node) -> None:
        self._set_horizon(phi, len(self.trace), self.trace.loop_length, self.trace.shift)

    def state_value(self, i: int, name: str, sort) -> Value:
        value = self.trace.states[self.trace.index(i)].get(name)
        return _default_of(sort) if value is None else value

    def time(self, i: int) -> Fraction:
        return self.trace.time(i)

    # -- temporal operators -------------------------------------------------

    def temporal(self, node: Node, i: int) -> bool:
        kind = node.kind
        f = self.formula
        args = node.args
        if kind is Kind.X:
            return f(args[0], i + 1)
        if kind is Kind.Y:
            return i > 0 and f(args[0], i - 1)
        if kind is Kind.Z:
            return i == 0 or f(args[0], i - 1)
        if kind in (Kind.X_S, Kind.Y_S):
            return False
        if kind is Kind.Z_S:
            return i == 0
        if kind is Kind.UNTIL_S:
            return self._until(args[0], args[1], i + 1)
        if kind is Kind.UNTIL:
            return self._until(args[0], args[1], i)
        if kind is Kind.UNTIL_C:
            return self._until(args[0], args[1], i)
        if kind is Kind.SINCE_S:
            return self._since(args[0], args[1], i - 1)
        if kind is Kind.SINCE:
            return self._since(args[0], args[1], i)
        if kind in (Kind.F, Kind.F_S):
            start = i if kind is Kind.F else i + 1
            return any(f(args[0], j) for j in range(start, self.limit(i) + 1))
        if kind in (Kind.G, Kind.G_S):
            start = i if kind is Kind.G else i + 1
            return all(f(args[0], j) for j in range(start, self.limit(i) + 1))
        if kind in (Kind.P, Kind.P_S):
            end = i if kind is Kind.P else i - 1
            return any(f(args[0], j) for j in range(end, -1, -1))
        if kind in (Kind.H, Kind.H_S):
            end = i if kind is Kind.H else i - 1
            return all(f(args[0], j) for j in range(end, -1, -1))
        if kind in L.METRIC_KINDS:
            return self._metric(node, i)
        raise TraceError(f"cannot evaluate {kind.value}")

    def _until(self, a: Node, b: Node, start: int) -> bool:
        for j in range(start, self.limit(start) + 1):
            if self.formula(b, j):
                return True
            if not self.formula(a, j):
                return False
        return False

    def _since(self, a: Node, b: Node, start: int) -> bool:
        for j in range(start, -1, -1):
            if self.formula(b, j):
                return True
            if not self.formula(a, j):
                return False
        return False

    def _future_points(self, i: int, strict: bool):
        """(j, t_j - t_i) for j >= i (j > i when strict), up to the scan limit."""
        t = self.time(i)
        for j in range(i + 1 if strict else i, self.limit(i) + 1):
            yield j, self.time(j) - t

    def _past_points(self, i: int, strict: bool):
        t = self.time(i)
        for j in range(i - 1 if strict else i, -1, -1):
            yield j, t - self.time(j)

    def _metric(self, node: Node, i: int) -> bool:
        kind = node.kind
        f = self.formula
        if kind in (Kind.COUNT_NEXT, Kind.COUNT_LAST):
            phi, bound = node.args
            c = self.rigid(bound)
            points = self._future_points(i, True) if kind is Kind.COUNT_NEXT else self._past_points(i, True)
            seen = 0
            for j, d in points:
                if d >= c:
                    break
                if f(phi, j):
                    seen += 1
                    if seen >= node.payload:
                        return True
            return False

        interval: Interval = node.payload
        lo = self.rigid(interval.lo)
        hi = self.rigid(interval.hi) if interval.hi is not None else None

        def inside(d: Fraction) -> bool:
            return _in_interval(d, lo, hi, interval)

        def past_bound(d: Fraction) -> bool:
            return hi is not None and (d > hi or (interval.hi_open and d == hi))

        if kind in (Kind.EVENT_NEXT, Kind.EVENT_LAST):
            points = self._future_points(i, True) if kind is Kind.EVENT_NEXT else self._past_points(i, True)
            for j, d in points:
                if f(node.args[0], j):
                    return inside(d)
            return False

        future = kind in (Kind.M_F, Kind.M_F_S, Kind.M_G, Kind.M_G_S, Kind.M_U, Kind.M_U_S)
        strict = kind in (Kind.M_F_S, Kind.M_G_S, Kind.M_P_S, Kind.M_H_S, Kind.M_U_S, Kind.M_S_S)
        points = self._future_points(i, strict) if future else self._past_points(i, strict)

        if kind in (Kind.M_F, Kind.M_F_S, Kind.M_P, Kind.M_P_S):
            for j, d in points:
                if past_bound(d):
                    break
                if inside(d) and f(node.args[0], j):
                    return True
            return False
        if kind in (Kind.M_G, Kind.M_G_S, Kind.M_H, Kind.M_H_S):
            for j, d in points:
                if past_bound(d):
                    break
                if inside(d) and not f(node.args[0], j):
                    return False
            return True
        # until / since: phi2 at j with d in the interval, phi1 strictly between (and at i if non-strict)
        a, b = node.args
        for j, d in points:
            if past_bound(d):
                break
            if inside(d) and f(b, j):
                return True
            if not f(a, j):
                return False
        return False

    # -- step and event-freezing terms -------------------------------------

    def step_term(self, node: Node, i: int) -> Any:
        kind = node.kind
        if kind is Kind.NEXT:
            return self.term(node.args[0], i + 1)
        if kind is Kind.PREV:
            if i == 0:
                return self.param_value(node.payload, node.sort)
            return self.term(node.args[0], i - 1)
        if kind in (Kind.AT_NEXT_ITER, Kind.AT_LAST_ITER):
            return self.term(L.unfold_iter(node), i)
        u, phi = node.args
        if kind in (Kind.AT_NEXT, Kind.AT_NEXT_NS):
            start = i + 1 if kind is Kind.AT_NEXT else i
            for j in range(start, self.limit(i) + 1):
                if self.formula(phi, j):
                    return self.term(u, j)
            return self.default_value(node)
        if kind in (Kind.AT_LAST, Kind.AT_LAST_NS):
            start = i - 1 if kind is Kind.AT_LAST else i
            for j in range(start, -1, -1):
                if self.formula(phi, j):
                    return self.term(u, j)
            return self.default_value(node)
        raise TraceError(f"cannot evaluate term {kind.value}")


def eval_discrete(trace: DiscreteLassoTrace, i: int, phi: Node, sig: Optional[Signature] = None) -> bool:
    """Truth of phi at position i of a discrete lasso."""
    if i < 0:
        raise TraceError(f"position {i} is negative")
    evaluator = DiscreteEvaluator(trace, sig)
    evaluator.prepare(phi)
    return evaluator.formula(phi, i)


def eval_term(trace: DiscreteLassoTrace, i: int, u: Node, sig: Optional[Signature] = None) -> Value:
    """Value of term u at position i of a discrete lasso."""
    if i < 0:
        raise TraceError(f"position {i} is negative")
    evaluator = DiscreteEvaluator(trace, sig)
    evaluator.prepare(u)
    return evaluator.term(u, i)


# ============================================================================
# INTERVAL LASSOS
# ============================================================================

class Refinement(Exception):
    def __init__(self, index: int, at: Fraction):
        super().__init__(f"split segment {index} at {at}")
        self.index = index
        self.at = at


@dataclass
class _Segment:
    point: bool
    lo: Fraction
    hi: Fraction
    entry: int
    state: Dict[str, Value]


class DenseEvaluator(_Evaluator):
    """Core-fragment semantics on the segments of an IntervalTrace."""

    def __init__(self, trace: IntervalTrace, sig: Optional[Signature] = None):
        super().__init__(sig, trace.params, trace.functions)
        self.trace = trace
        self.segments: List[_Segment] = []
        self._entries = 0

    def core(self, phi: Node) -> Node:
        """phi in the core fragment for the trace's time model; prepares the horizon."""
        result = expand(encode_metric(phi, self.trace.time_model, self.sig), self.sig)
        self.prepare(result)
        return result

    def prepare(self, phi: Node) -> None:
        """Horizon for a formula that is already core."""
        self._set_horizon(phi, len(self.trace), self.trace.loop_length, self.trace.shift)

    # -- segments -----------------------------------------------------------

    def segment(self, q: int) -> _Segment:
        while q >= len(self.segments):
            e = self.trace.entry(self._entries)
            self.segments.append(_Segment(e.is_point, e.lo, e.hi, self._entries, e.state))
            self._entries += 1
        return self.segments[q]

    def split(self, q: int, at: Fraction) -> int:
        s = self.segment(q)
        if s.point or not s.lo < at < s.hi:
            raise TraceError(f"cannot split segment {q} at {at}")
        self.segments[q:q + 1] = [
            _Segment(False, s.lo, at, s.entry, s.state),
            _Segment(True, at, at, s.entry, s.state),
            _Segment(False, at, s.hi, s.entry, s.state),
        ]
        self._memo.clear()
        return q + 1

    def position(self, t: Fraction, step: int = 0) -> int:
        """Segment index of time t (the step-th point at t in super-dense time)."""
        t = Fraction(t)
        if t < 0:
            raise TraceError(f"time {t} precedes the trace")
        q, seen = 0, 0
        while True:
            s = self.segment(q)
            if s.point and s.lo == t:
                if seen == step:
                    return q
                seen += 1
            elif not s.point and s.lo < t < s.hi:
                if step:
                    raise TraceError(f"time {t} lies in an open interval; only step 0 exists")
                return self.split(q, t)
            elif s.lo > t:
                raise TraceError(f"no step {step} at time {t}")
            q += 1

    def run(self, fn, t: Fraction, step: int = 0):
        """Evaluate fn(position) and retry after every refinement."""
        while True:
            try:
                return fn(self.position(t, step))
            except Refinement as r:
                self.split(r.index, r.at)

    # -- hooks --------------------------------------------------------------

    def state_value(self, q: int, name: str, sort) -> Value:
        value = self.segment(q).state.get(name)
        return _default_of(sort) if value is None else value

    def time(self, q: int) -> Num:
        s = self.segment(q)
        return s.lo if s.point else Affine(Fraction(1), Fraction(0))

    def difference(self, d: Num, q: int) -> Fraction:
        if not isinstance(d, Affine):
            return d
        s = self.segment(q)
        root = -d.b / d.a
        if s.lo < root < s.hi:
            raise Refinement(q, root)
        return d.at((s.lo + s.hi) / 2)

    def _scan_end(self, q: int) -> int:
        return self.limit(self.segment(q).entry)

    def temporal(self, node: Node, q: int) -> bool:
        kind = node.kind
        if kind is Kind.UNTIL_S:
            a, b = node.args
            end = self._scan_end(q)
            r = q if not self.segment(q).point else q + 1
            while self.segment(r).entry <= end:
                decided = self._step(a, b, r)
                if decided is not None:
                    return decided
                r += 1
            return False
        if kind is Kind.SINCE_S:
            a, b = node.args
            r = q if not self.segment(q).point else q - 1
            while r >= 0:
                decided = self._step(a, b, r)
                if decided is not None:
                    return decided
                r -= 1
            return False
        raise TraceError(f"{kind.value} is not in the core fragment")

    def _step(self, a: Node, b: Node, r: int) -> Optional[bool]:
        """One segment of an until/since scan; None while undecided."""
        if self.segment(r).point:
            if self.formula(b, r):
                return True
            if not self.formula(a, r):
                return False
            return None
        if not self.formula(a, r):
            return False
        if self.formula(b, r):
            return True
        return None

    def step_term(self, node: Node, q: int) -> Any:
        kind = node.kind
        if kind not in (Kind.AT_NEXT, Kind.AT_LAST):
            raise TraceError(f"{kind.value} is not in the core fragment")
        u, phi = node.args
        s = self.segment(q)
        if not s.point and self.formula(phi, q):
            return self.term(u, q)
        if kind is Kind.AT_NEXT:
            if s.point:
                after = self.segment(q + 1)
                if not after.point and self.formula(phi, q + 1):
                    return self.term(u, q)
            end = self._scan_end(q)
            r = q + 1
            while self.segment(r).entry <= end:
                if self.segment(r).point and self._onset_after(phi, r):
                    return self.term(u, r)
                r += 1
            return self.default_value(node)
        if s.point and q > 0:
            before = self.segment(q - 1)
            if not before.point and self.formula(phi, q - 1):
                return self.term(u, q)
        r = q - 1
        while r >= 0:
            if self.segment(r).point and self._onset_before(phi, r):
                return self.term(u, r)
            r -= 1
        return self.default_value(node)

    def _onset_after(self, phi: Node, r: int) -> bool:
        if self.formula(phi, r):
            return True
        nxt = self.segment(r + 1)
        return not nxt.point and self.formula(phi, r + 1)

    def _onset_before(self, phi: Node, r: int) -> bool:
        if self.formula(phi, r):
            return True
        return r > 0 and not self.segment(r - 1).point and self.formula(phi, r - 1)


def eval_dense(trace: IntervalTrace, t: Any, phi: Node, sig: Optional[Signature] = None, step: int = 0) -> bool:
    """Truth of phi at time t of an interval lasso (the step-th point at t in super-dense time)."""
    evaluator = DenseEvaluator(trace, sig)
    core = evaluator.core(phi)
    return evaluator.run(lambda q: evaluator.formula(core, q), Fraction(t), step)


def eval_dense_term(trace: IntervalTrace, t: Any, u: Node, sig: Optional[Signature] = None, step: int = 0) -> Value:
    evaluator = DenseEvaluator(trace, sig)
    core_u = evaluator.core(u)

    def value(q: int):
        v = evaluator.term(core_u, q)
        if isinstance(v, Affine):
            return v.at(evaluator.segment(q).lo)
        return v

    return evaluator.run(value, Fraction(t), step)


def holds(trace: Union[DiscreteLassoTrace, IntervalTrace], phi: Node, sig: Optional[Signature] = None) -> bool:
    """Truth of phi at the initial position of either kind of trace."""
    if isinstance(trace, IntervalTrace):
        return eval_dense(trace, 0, phi, sig)
    return eval_discrete(trace, 0, phi, sig)
