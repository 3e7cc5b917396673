"""Clock Normalization - time-valued variables rewritten relative to `time`

Prophecy and monitor variables that hold timestamps grow without bound.
Each one becomes time + c with a fresh clock c that only changes when the
variable is frozen. Atoms are then linear over time and clocks:

    no time left            -> ordinary atom
    a*time + R, R rigid     -> sign test on a countdown r = E - time
    anything else           -> time is kept as a drifting variable

At the top level (position 0) time is 0 and is substituted away.

INVARIANTS:
1. Output mentions no time-valued prophecy or monitor variable
2. Countdowns are shared per rigid bound E
3. Every atom that drifts over a loop is listed in drift_atoms with its
   coefficients on `time` and on the clocks
"""

import logging
from dataclasses import replace
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from core import logic as L
from core.errors import ClockNormalizationError
from core.logic import Kind, Node, Signature
from core.removal import LtlNextProblem

TIME_NAME = "time"

_SIGN_OF_COUNTDOWN = {"<=": ">=", "<": ">", ">=": "<=", ">": "<", "=": "="}

Linear = Tuple[Dict[Node, Fraction], Fraction]


def is_time_valued(term: Node, sig: Signature) -> bool:
    """Value of term is a timestamp: time, an event-freezing term over one, or a variable replacing one."""
    kind = term.kind
    if kind is Kind.TIME:
        return True
    if kind is Kind.VAR:
        origin = sig.origins.get(term.payload)
        return origin is not None and is_time_valued(origin, sig)
    if kind in L.EF_KINDS or kind in (Kind.NEXT, Kind.PREV):
        return is_time_valued(term.args[0], sig)
    if kind is Kind.ITE:
        return is_time_valued(term.args[1], sig) and is_time_valued(term.args[2], sig)
    return False


def _compare(op: str, value: Fraction) -> bool:
    return {"=": value == 0, "<": value < 0, "<=": value <= 0,
            ">": value > 0, ">=": value >= 0}[op]


class _Normalizer:

    def __init__(self, problem: LtlNextProblem):
        self.sig = problem.signature
        sampling = problem.sampling
        self.delta = sampling.delta_node() if sampling.delta else None
        self.clocks: Dict[str, Node] = {}
        self.countdowns: Dict[Node, Node] = {}
        self.side: List[Node] = []
        self.drift_atoms: Dict[Node, Dict[str, Fraction]] = {}
        self.keeps_time = False
        self._memo: Dict[Tuple[int, bool], Node] = {}
        self._dep: Dict[int, bool] = {}

    # -- classification -----------------------------------------------------

    def time_var(self, node: Node) -> bool:
        return node.kind is Kind.VAR and is_time_valued(node, self.sig)

    def dependent(self, term: Node) -> bool:
        """Value of term changes with time or with a time-valued variable."""
        done = self._dep.get(term.id)
        if done is not None:
            return done
        kind = term.kind
        if kind is Kind.TIME:
            result = True
        elif kind is Kind.VAR:
            result = self.time_var(term)
        elif kind is Kind.ITE:
            result = self.dependent(term.args[1]) or self.dependent(term.args[2])
        elif kind in (Kind.APPLY, Kind.NEXT):
            result = any(self.dependent(a) for a in term.args)
        else:
            result = False
        self._dep[term.id] = result
        return result

    def clock(self, name: str) -> Node:
        c = self.clocks.get(name)
        if c is None:
            c = self.sig.fresh_var("c", L.REAL)
            self.clocks[name] = c
            logging.debug(f"clock {c.payload} for time-valued variable {name}")
        return c

    def step(self) -> Node:
        if self.delta is None:
            raise ClockNormalizationError("next(time) needs a sampling step variable")
        return self.delta

    # -- formulas -----------------------------------------------------------

    def formula(self, node: Node, top: bool) -> Node:
        key = (node.id, top)
        done = self._memo.get(key)
        if done is not None:
            return done
        kind = node.kind
        if kind is Kind.PRED:
            result = self.atom(node, top)
        elif kind in L.TEMPORAL_KINDS:
            result = L.rebuild(node, tuple(self.formula(a, False) for a in node.args))
        elif kind in (Kind.NOT, Kind.AND, Kind.OR, Kind.IMPLIES, Kind.IFF):
            result = L.rebuild(node, tuple(self.formula(a, top) for a in node.args))
        elif kind in (Kind.TRUE, Kind.FALSE, Kind.VAR, Kind.PARAM):
            result = node
        elif kind in (Kind.APPLY, Kind.ITE, Kind.NEXT):
            result = self.plain(node, top)
        else:
            raise ClockNormalizationError(f"unexpected {kind.value} in an LTL-with-next formula")
        self._memo[key] = result
        return result

    def plain(self, term: Node, top: bool) -> Node:
        """A term whose value does not depend on time; conditions inside are normalized."""
        if self.dependent(term):
            raise ClockNormalizationError(f"time-valued subterm in a non-linear position: {term!r}")
        if term.kind is Kind.ITE:
            cond, a, b = term.args
            return L.ite(self.formula(cond, top), self.plain(a, top), self.plain(b, top))
        if not term.args:
            return term
        return L.rebuild(term, tuple(self.plain(a, top) if a.is_term else self.formula(a, top)
                                     for a in term.args))

    # -- atoms --------------------------------------------------------------

    def atom(self, node: Node, top: bool) -> Node:
        op, lhs, rhs = node.payload, node.args[0], node.args[1]
        if lhs.sort == L.BOOL:
            return L.pred(op, self.formula(lhs, top), self.formula(rhs, top))
        if not (self.dependent(lhs) or self.dependent(rhs)):
            return L.pred(op, self.plain(lhs, top), self.plain(rhs, top))
        lifted = self._first_dependent_ite(node)
        if lifted is not None:
            cond, a, b = lifted.args
            then = L.substitute(node, {lifted: a})
            other = L.substitute(node, {lifted: b})
            return self.formula(L.or_(L.and_(cond, then), L.and_(L.not_(cond), other)), top)

        coeffs, const = self._combine(self.linear(lhs, top), self.linear(rhs, top), Fraction(-1))
        a = coeffs.pop(L.time_(), Fraction(0))
        if top:
            a = Fraction(0)
        if a == 0:
            if not coeffs:
                return L.true() if _compare(op, const) else L.false()
            result = self._rebuild(op, coeffs, const)
        elif all(L.is_rigid(k) for k in coeffs):
            return self._countdown(op, a, coeffs, const)
        else:
            self.keeps_time = True
            result = self._rebuild(op, {L.time_(): a, **coeffs}, const)
        if not top:
            rates = self._rates(coeffs, a)
            if rates:
                self.drift_atoms[result] = rates
        return result

    def _first_dependent_ite(self, node: Node) -> Optional[Node]:
        """Leftmost time-valued ite in a value position of the atom (not under next)."""
        stack = list(reversed(node.args))
        while stack:
            term = stack.pop()
            if term.kind is Kind.ITE and self.dependent(term):
                return term
            if term.kind is Kind.APPLY and term.payload in L.ARITH_OPS:
                stack.extend(reversed(term.args))
        return None

    def _rates(self, coeffs: Dict[Node, Fraction], a: Fraction) -> Dict[str, Fraction]:
        clock_names = {c.payload for c in self.clocks.values()}
        rates: Dict[str, Fraction] = {}
        if a:
            rates[TIME_NAME] = a
        for key, coef in coeffs.items():
            base = key.args[0] if key.kind is Kind.NEXT else key
            if base.kind is Kind.VAR and base.payload in clock_names:
                rates[base.payload] = rates.get(base.payload, Fraction(0)) + coef
        return {k: v for k, v in rates.items() if v}

    def _countdown(self, op: str, a: Fraction, coeffs: Dict[Node, Fraction], const: Fraction) -> Node:
        bound = _sum({k: -c / a for k, c in coeffs.items()}, -const / a)
        if a < 0:
            op = L.FLIPPED_OP[op]
        r = self.countdowns.get(bound)
        if r is None:
            delta = self.step()
            r = self.sig.fresh_var("r", L.REAL)
            self.countdowns[bound] = r
            zero = L.num(0)
            self.side.append(L.pred("=", r, bound))
            self.side.append(L.unary(Kind.G, L.pred(
                "=", L.next_(r), L.ite(L.pred("<", r, zero), r, L.sub(r, delta)))))
        return L.pred(_SIGN_OF_COUNTDOWN[op], r, L.num(0))

    # -- linear forms -------------------------------------------------------

    @staticmethod
    def _combine(x: Linear, y: Linear, factor: Fraction) -> Linear:
        coeffs = dict(x[0])
        for k, v in y[0].items():
            coeffs[k] = coeffs.get(k, Fraction(0)) + factor * v
        return {k: v for k, v in coeffs.items() if v}, x[1] + factor * y[1]

    def linear(self, term: Node, top: bool) -> Linear:
        kind = term.kind
        one = Fraction(1)
        if kind is Kind.NUM:
            return {}, term.payload
        if kind is Kind.TIME:
            return {L.time_(): one}, Fraction(0)
        if kind is Kind.VAR:
            if self.time_var(term):
                return {L.time_(): one, self.clock(term.payload): one}, Fraction(0)
            return {term: one}, Fraction(0)
        if kind is Kind.PARAM:
            return {term: one}, Fraction(0)
        if kind is Kind.NEXT:
            inner = term.args[0]
            if inner.kind is Kind.TIME:
                return {L.time_(): one, self.step(): one}, Fraction(0)
            if inner.kind is Kind.VAR:
                if self.time_var(inner):
                    c = self.clock(inner.payload)
                    return {L.time_(): one, self.step(): one, L.next_(c): one}, Fraction(0)
                return {term: one}, Fraction(0)
            if self.dependent(inner):
                raise ClockNormalizationError(f"next over a compound time-valued term: {term!r}")
            return {self.plain(term, top): one}, Fraction(0)
        if kind is Kind.APPLY and term.payload in L.ARITH_OPS:
            if term.payload == "neg":
                return self._combine(({}, Fraction(0)), self.linear(term.args[0], top), -one)
            x = self.linear(term.args[0], top)
            y = self.linear(term.args[1], top)
            if term.payload == "+":
                return self._combine(x, y, one)
            if term.payload == "-":
                return self._combine(x, y, -one)
            if not x[0]:
                return self._combine(({}, Fraction(0)), y, x[1])
            if not y[0]:
                return self._combine(({}, Fraction(0)), x, y[1])
        if self.dependent(term):
            raise ClockNormalizationError(f"time-valued term is not linear: {term!r}")
        return {self.plain(term, top): one}, Fraction(0)

    def _rebuild(self, op: str, coeffs: Dict[Node, Fraction], const: Fraction) -> Node:
        return L.pred(op, _sum(coeffs, Fraction(0)), L.num(-const))


def _sum(coeffs: Dict[Node, Fraction], const: Fraction) -> Node:
    total: Optional[Node] = None
    for key, coef in coeffs.items():
        if coef == 1:
            item = key
        elif coef == -1:
            item = L.neg(key)
        else:
            item = L.mul(L.num(coef), key)
        total = item if total is None else L.add(total, item)
    if total is None:
        return L.num(const)
    return L.add(total, L.num(const)) if const else total


def clock_normalize(problem: LtlNextProblem) -> LtlNextProblem:
    """Equi-satisfiable problem without time-valued variables and with time only where it must drift."""
    if problem.normalized:
        return problem
    normalizer = _Normalizer(problem)
    body = normalizer.formula(problem.formula, True)
    extra = list(normalizer.side)
    if normalizer.keeps_time:
        time = L.time_()
        extra.append(L.pred("=", time, L.num(0)))
        extra.append(L.unary(Kind.G, L.pred("=", L.next_(time), L.add(time, normalizer.step()))))
    formula = L.conj([body] + extra)
    clocks = {name: c.payload for name, c in normalizer.clocks.items()}
    countdowns = {r.payload: bound for bound, r in normalizer.countdowns.items()}
    logging.info(f"Clock normalization: {len(clocks)} clocks, {len(countdowns)} countdowns, "
                 f"time {'kept' if normalizer.keeps_time else 'eliminated'}")
    return replace(problem, formula=formula, clocks=clocks, countdowns=countdowns,
                   drift_atoms=normalizer.drift_atoms, keeps_time=normalizer.keeps_time,
                   normalized=True)
