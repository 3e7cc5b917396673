"""Generators - seeded random formulas and traces, plus shrinking

Every generator takes a random.Random, so a case is reproducible from its
seed alone. Families bias the formula shape toward the constructs a suite
exercises: event-freezing terms, metric operators or plain LTL.

INVARIANTS:
1. Formulas are well-sorted over suite_signature()
2. Generated traces satisfy their own validation (no Zeno loops)
3. shrink() only ever returns a case that still fails
"""

import logging
import random
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from core import logic as L
from core.errors import XltlefError
from core.logic import Interval, Kind, Node, Signature, TimeModel
from oracle.traces import DiscreteLassoTrace, IntervalEntry, IntervalTrace, Value

FAMILIES = ("propositional", "ef", "mtl", "ectl", "tlc", "dense")

BOOL_VARS = ("b", "c")
REAL_VARS = ("x", "y")
PARAMS = ("p",)

_FUTURE_UNARY = (Kind.X, Kind.F, Kind.G, Kind.X_S, Kind.F_S, Kind.G_S)
_PAST_UNARY = (Kind.Y, Kind.Z, Kind.P, Kind.H, Kind.Y_S, Kind.Z_S, Kind.P_S, Kind.H_S)
_BINARY = (Kind.UNTIL, Kind.SINCE, Kind.UNTIL_S, Kind.SINCE_S)
_DENSE_UNARY = (Kind.F, Kind.G, Kind.P, Kind.H, Kind.F_S, Kind.G_S, Kind.P_S, Kind.H_S, Kind.X_S, Kind.Y_S)
_METRIC_UNARY = (Kind.M_F, Kind.M_G, Kind.M_P, Kind.M_H, Kind.M_F_S, Kind.M_G_S, Kind.M_P_S, Kind.M_H_S)


def suite_signature() -> Signature:
    """b, c : bool; x, y : real; p : real."""
    sig = Signature()
    for name in BOOL_VARS:
        sig.declare_var(name, L.BOOL)
    for name in REAL_VARS:
        sig.declare_var(name, L.REAL)
    for name in PARAMS:
        sig.declare_param(name, L.REAL)
    return sig


# ============================================================================
# FORMULAS
# ============================================================================

class FormulaGenerator:
    """Random well-sorted formulas of one family."""

    def __init__(self, rng: random.Random, family: str = "propositional", max_depth: int = 6,
                 model: TimeModel = TimeModel.DISCRETE):
        if family not in FAMILIES:
            raise ValueError(f"Unknown formula family '{family}'")
        self.rng = rng
        self.family = family
        self.max_depth = max_depth
        self.model = model

    def formula(self, depth: Optional[int] = None) -> Node:
        depth = self.max_depth if depth is None else depth
        rng = self.rng
        if depth <= 1 or rng.random() < 0.2:
            return self.atom(depth)
        roll = rng.random()
        if roll < 0.25:
            return L.not_(self.formula(depth - 1))
        if roll < 0.45:
            op = rng.choice((L.and_, L.or_, L.implies, L.iff))
            return op(self.formula(depth - 1), self.formula(depth - 1))
        if roll < 0.65 or self.family in ("propositional", "ef"):
            return self._temporal(depth)
        return self._metric(depth)

    def _temporal(self, depth: int) -> Node:
        rng = self.rng
        if self.family == "dense":
            if rng.random() < 0.7:
                return L.unary(rng.choice(_DENSE_UNARY), self.formula(depth - 1))
            kind = rng.choice((Kind.UNTIL_S, Kind.SINCE_S, Kind.UNTIL, Kind.SINCE))
            return L.binary(kind, self.formula(depth - 1), self.formula(depth - 1))
        if rng.random() < 0.65:
            return L.unary(rng.choice(_FUTURE_UNARY + _PAST_UNARY), self.formula(depth - 1))
        return L.binary(rng.choice(_BINARY), self.formula(depth - 1), self.formula(depth - 1))

    def _bound(self) -> Node:
        if self.rng.random() < 0.2:
            return L.param(PARAMS[0], L.REAL)
        return L.num(self.rng.choice((1, 2, 3)))

    def _interval(self, zero_anchored: bool = False) -> Interval:
        rng = self.rng
        a = self._bound()
        if zero_anchored or self.model is not TimeModel.DISCRETE:
            return rng.choice((Interval.le, Interval.lt))(a)
        return rng.choice((Interval.le, Interval.lt, Interval.ge, Interval.gt))(a)

    def _metric(self, depth: int) -> Node:
        rng = self.rng
        family = self.family
        if family == "ectl" or (family == "dense" and rng.random() < 0.3):
            kind = rng.choice((Kind.EVENT_NEXT, Kind.EVENT_LAST))
            interval = rng.choice((Interval.le, Interval.lt, Interval.eq, Interval.ge))(self._bound())
            return L.metric(kind, (self.formula(depth - 1),), interval)
        if family == "tlc":
            kind = rng.choice((Kind.COUNT_NEXT, Kind.COUNT_LAST))
            return L.count(kind, self.formula(depth - 1), rng.choice((1, 2)), self._bound())
        if rng.random() < 0.7:
            kind = rng.choice(_METRIC_UNARY)
            return L.metric(kind, (self.formula(depth - 1),), self._interval())
        kind = rng.choice((Kind.M_U, Kind.M_S, Kind.M_U_S, Kind.M_S_S))
        zero = family == "dense"
        return L.metric(kind, (self.formula(depth - 1), self.formula(depth - 1)), self._interval(zero))

    # -- atoms and terms ----------------------------------------------------

    def atom(self, depth: int = 1) -> Node:
        rng = self.rng
        roll = rng.random()
        if roll < 0.45 or self.family == "propositional":
            return L.var(rng.choice(BOOL_VARS), L.BOOL)
        if self.family in ("ef", "dense") and depth > 1 and roll < 0.8:
            return self._ef_atom(depth)
        if self.family in ("mtl", "ectl", "tlc", "dense") and roll < 0.6:
            return L.pred(rng.choice(("<=", "<", ">=")), L.time_(), L.num(rng.choice((1, 2, 4))))
        op = rng.choice(("=", "<", "<=", ">"))
        lhs = L.var(rng.choice(REAL_VARS), L.REAL)
        rhs = L.var(rng.choice(REAL_VARS), L.REAL) if rng.random() < 0.5 else L.num(rng.choice((0, 1, 2)))
        return L.pred(op, lhs, rhs)

    def _ef_atom(self, depth: int) -> Node:
        rng = self.rng
        if self.family == "dense" and rng.random() < 0.4:
            kind = rng.choice((Kind.AT_NEXT, Kind.AT_LAST))
            ef = L.mk(kind, (L.time_(), self.formula(min(depth - 1, 2))), None, L.REAL)
            diff = L.sub(ef, L.time_()) if kind is Kind.AT_NEXT else L.sub(L.time_(), ef)
            return L.pred(rng.choice(("<=", "<", ">=", ">")), diff, L.num(rng.choice((1, 2))))
        term = self.ef_term(depth - 1)
        op = rng.choice(("=", "<", "<=", ">"))
        other = L.var(rng.choice(REAL_VARS), L.REAL) if rng.random() < 0.6 else L.num(rng.choice((0, 1)))
        return L.pred(op, term, other)

    def ef_term(self, depth: int) -> Node:
        """u@F~(phi) and friends over the real variables; u may itself be such a term."""
        rng = self.rng
        kinds = [Kind.AT_NEXT, Kind.AT_LAST, Kind.AT_NEXT_NS, Kind.AT_LAST_NS]
        kind = rng.choice(kinds)
        inner = L.var(rng.choice(REAL_VARS), L.REAL)
        if depth > 2 and rng.random() < 0.25:
            inner = self.ef_term(depth - 1)
        phi = self.formula(min(depth, 2))
        if rng.random() < 0.15 and kind in (Kind.AT_NEXT, Kind.AT_LAST):
            iter_kind = Kind.AT_NEXT_ITER if kind is Kind.AT_NEXT else Kind.AT_LAST_ITER
            return L.at_iter(iter_kind, inner, phi, 2)
        return L.mk(kind, (inner, phi), None, L.REAL)


# ============================================================================
# TRACES
# ============================================================================

def random_state(rng: random.Random, values: Sequence[int] = (0, 1, 2)) -> Dict[str, Value]:
    state: Dict[str, Value] = {name: rng.random() < 0.5 for name in BOOL_VARS}
    state.update({name: Fraction(rng.choice(values)) for name in REAL_VARS})
    return state


def random_params(rng: random.Random) -> Dict[str, Value]:
    return {name: Fraction(rng.choice((1, 2))) for name in PARAMS}


def random_discrete_trace(rng: random.Random, max_prefix: int = 3, max_loop: int = 3,
                          timed: bool = True) -> DiscreteLassoTrace:
    prefix = rng.randint(0, max_prefix)
    loop = rng.randint(1, max_loop)
    n = prefix + loop
    states = [random_state(rng) for _ in range(n)]
    if not timed:
        return DiscreteLassoTrace(states, prefix, params=random_params(rng))
    times = [Fraction(0)]
    for _ in range(n - 1):
        times.append(times[-1] + rng.choice((0, 1, 1, 2)))
    shift = times[-1] - times[prefix] + rng.choice((1, 2))
    return DiscreteLassoTrace(states, prefix, times, random_params(rng), shift=shift)


def random_interval_trace(rng: random.Random, model: TimeModel = TimeModel.DENSE,
                          max_entries: int = 7) -> IntervalTrace:
    """Alternating singular/open intervals; super-dense traces repeat points now and then."""
    kinds = ["point"]
    target = rng.randint(2, max_entries)
    while len(kinds) < target or kinds[-1] == "point":
        if kinds[-1] == "open":
            kinds.append("point")
        elif model is TimeModel.SUPER_DENSE and len(kinds) < target and rng.random() < 0.3:
            kinds.append("point")
        else:
            kinds.append("open")
    points = [i for i, k in enumerate(kinds) if k == "point"]
    loop_start = rng.choice(points)

    entries: List[IntervalEntry] = []
    t = Fraction(0)
    for kind in kinds:
        if kind == "point":
            entries.append(IntervalEntry.point(t, random_state(rng)))
        else:
            hi = t + rng.choice((Fraction(1, 2), Fraction(1), Fraction(2)))
            entries.append(IntervalEntry.open(t, hi, random_state(rng)))
            t = hi
    shift = t - entries[loop_start].lo
    return IntervalTrace(entries, loop_start, shift, random_params(rng), time_model=model)


def unit_point_trace(trace: DiscreteLassoTrace) -> IntervalTrace:
    """The singular-interval trace of a discrete lasso (points at its timestamps)."""
    entries = [IntervalEntry.point(trace.timestamps[i], trace.states[i]) for i in range(len(trace))]
    return IntervalTrace(entries, trace.loop_start, trace.shift, dict(trace.params),
                         dict(trace.functions), TimeModel.DISCRETE)


def unroll(trace: DiscreteLassoTrace, rounds: int) -> DiscreteLassoTrace:
    """Same model with `rounds` loop iterations moved into the prefix."""
    n = len(trace) + rounds * trace.loop_length
    states = [dict(trace.states[trace.index(i)]) for i in range(n)]
    times = [trace.time(i) for i in range(n)]
    return DiscreteLassoTrace(states, trace.loop_start + rounds * trace.loop_length, times,
                              dict(trace.params), dict(trace.functions), shift=trace.shift)


# ============================================================================
# SHRINKING
# ============================================================================

def _drop_state(trace: DiscreteLassoTrace, j: int) -> Optional[DiscreteLassoTrace]:
    if len(trace) == 1 or (j >= trace.loop_start and trace.loop_length == 1):
        return None
    states = trace.states[:j] + trace.states[j + 1:]
    times = trace.timestamps[:j] + trace.timestamps[j + 1:]
    times = [t - times[0] for t in times]
    loop_start = trace.loop_start - 1 if j < trace.loop_start else trace.loop_start
    try:
        return DiscreteLassoTrace(states, loop_start, times, dict(trace.params),
                                  dict(trace.functions), shift=trace.shift)
    except XltlefError:
        return None


def _smaller_formulas(phi: Node) -> List[Node]:
    candidates = [a for a in phi.args if a.sort == L.BOOL]
    for node in L.subformulas(phi):
        if node is phi or node.kind in (Kind.TRUE, Kind.FALSE):
            continue
        for constant in (L.true(), L.false()):
            candidates.append(L.substitute(phi, {node: constant}))
    return [c for c in candidates if L.node_count(c) < L.node_count(phi)]


Case = Tuple[object, Node]


def shrink(trace, phi: Node, fails: Callable[[object, Node], bool], budget: int = 200) -> Case:
    """Greedy shrinking: trace length first, then formula size."""
    steps = 0
    changed = True
    while changed and steps < budget:
        changed = False
        if isinstance(trace, DiscreteLassoTrace):
            for j in range(len(trace)):
                smaller = _drop_state(trace, j)
                steps += 1
                if smaller is not None and _still_fails(fails, smaller, phi):
                    trace, changed = smaller, True
                    break
            if changed:
                continue
        for candidate in _smaller_formulas(phi):
            steps += 1
            if _still_fails(fails, trace, candidate):
                phi, changed = candidate, True
                break
            if steps >= budget:
                break
    logging.debug(f"shrink: {steps} attempts")
    return trace, phi


def _still_fails(fails: Callable[[object, Node], bool], trace, phi: Node) -> bool:
    try:
        return fails(trace, phi)
    except XltlefError:
        return False
