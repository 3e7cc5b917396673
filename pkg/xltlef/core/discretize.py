"""Discretize - dense and super-dense problems as discrete LTL with next/prev

A dense trace is sampled into singular points (iota true) and open
intervals (iota false). D rewrites strict operators to hold on those
samples; psi_iota constrains the sampling and psi_time the timestamps.

INVARIANTS:
1. Input is core (expand output); output uses U, S, X, Y, Z, @F, @P, next, prev
2. Every @F/@P created here shares the default of the strict term it translates
3. Sampling variables get fresh names, so user variables named iota/delta/zeta are safe
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from core import logic as L
from core.errors import StageError
from core.logic import Kind, Node, Signature, TimeModel

STAGE_DISCRETE = "post-discretization"
STAGE_DISCRETE_INPUT = "discrete-input"


@dataclass(frozen=True)
class SamplingVars:
    """Names of the sampling state variables (iota is None for discrete time)."""
    iota: Optional[str]
    delta: Optional[str]
    zeta: Optional[str]

    def iota_node(self) -> Node:
        return L.var(self.iota, L.BOOL)

    def delta_node(self) -> Node:
        return L.var(self.delta, L.REAL)

    def zeta_node(self) -> Node:
        return L.var(self.zeta, L.REAL)


@dataclass
class DiscretizedProblem:
    """D(phi) together with the sampling and timestamp constraints."""
    formula: Node                       # d_formula & psi_iota & psi_time
    d_formula: Node
    psi_iota: Node
    psi_time: Node
    sampling: SamplingVars
    model: TimeModel
    stage: str
    signature: Signature
    uniformity: List[Node] = field(default_factory=list)


def _globally(phi: Node) -> Node:
    return L.unary(Kind.G, phi)


def _eq(a: Node, b: Node) -> Node:
    return L.pred("=", a, b)


# ============================================================================
# D REWRITING
# ============================================================================

class _Discretizer(L.Rewriter):

    def __init__(self, sig: Signature, iota: Node):
        super().__init__()
        self.sig = sig
        self.iota = iota

    def rewrite(self, node: Node, args: Tuple[Node, ...]) -> Node:
        kind = node.kind
        iota = self.iota
        if kind is Kind.UNTIL_S or kind is Kind.SINCE_S:
            d1, d2 = args
            base = Kind.UNTIL if kind is Kind.UNTIL_S else Kind.SINCE
            step = Kind.X if kind is Kind.UNTIL_S else Kind.Y
            inner = L.binary(base, d1, L.or_(L.and_(iota, d2), L.and_(d1, d2)))
            return L.or_(L.and_(L.not_(iota), L.and_(d1, inner)),
                         L.and_(iota, L.unary(step, inner)))
        if kind is Kind.AT_NEXT:
            u, phi = args
            ns = L.at_next_ns(u, L.or_(phi, L.unary(Kind.X, L.and_(L.not_(iota), phi))))
            self.sig.alias_default(ns, node)
            guard = L.and_(iota, L.unary(Kind.X, L.or_(iota, L.not_(phi))))
            return L.ite(guard, L.next_(ns), ns)
        if kind is Kind.AT_LAST:
            u, phi = args
            ns = L.at_last_ns(u, L.or_(phi, L.unary(Kind.Y, L.and_(L.not_(iota), phi))))
            self.sig.alias_default(ns, node)
            guard = L.and_(iota, L.unary(Kind.Z, L.or_(iota, L.not_(phi))))
            return L.ite(guard, L.prev_(ns, self.sig.default_for(node)), ns)
        if kind in (Kind.TRUE, Kind.PRED, Kind.NOT, Kind.AND) or kind in L.TERM_KINDS:
            if kind in (Kind.NEXT, Kind.PREV, Kind.AT_NEXT_NS, Kind.AT_LAST_NS,
                        Kind.AT_NEXT_ITER, Kind.AT_LAST_ITER):
                raise StageError(f"discretize expects a core formula, found {kind.value}")
            return L.rebuild(node, args)
        raise StageError(f"discretize expects a core formula, found {kind.value}")


# ============================================================================
# TIMESTAMP UNIFORMITY
# ============================================================================

class _Limit(L.Rewriter):
    """Value of a discretized time term approached from the right (or left) neighbour."""

    def __init__(self, sig: Signature, from_right: bool):
        super().__init__()
        self.sig = sig
        self.from_right = from_right
        self._default: Optional[str] = None

    def walk(self, node: Node) -> Node:
        done = self._memo.get(node.id)
        if done is not None:
            return done
        kind = node.kind
        if kind is Kind.TIME:
            result = L.next_(node) if self.from_right else L.prev_(node, self._prev_default())
        elif kind in (Kind.AT_NEXT_NS, Kind.AT_LAST_NS):
            u, phi = node.args
            result = L.ite(phi, self.walk(u), node)
        elif kind is Kind.ITE:
            cond, then, other = node.args
            result = L.ite(cond, self.walk(then), self.walk(other))
        elif kind in (Kind.NEXT, Kind.PREV) or kind not in L.TERM_KINDS:
            result = node
        else:
            result = L.rebuild(node, tuple(self.walk(a) for a in node.args))
        self._memo[node.id] = result
        return result

    def _prev_default(self) -> str:
        if self._default is None:
            self._default = self.sig.fresh_param("def", L.REAL).payload
        return self._default


def _uniformity(atom: Node, discretize, sig: Signature, iota: Node) -> Node:
    """Truth of a time atom is constant on every open interval and matches its limits."""
    op, lhs, bound = atom.payload, atom.args[0], atom.args[1]
    not_iota = L.not_(iota)
    if lhs.kind is Kind.TIME:
        le = discretize(L.pred("<=", lhs, bound))
        ge = discretize(L.pred(">=", lhs, bound))
        return _globally(L.implies(not_iota, L.and_(L.implies(le, L.unary(Kind.X, le)),
                                                    L.implies(ge, L.unary(Kind.Y, ge)))))
    d_atom = discretize(atom)
    d_lhs = d_atom.args[0]
    plus = _Limit(sig, True)(d_lhs)
    minus = _Limit(sig, False)(d_lhs)
    if op in ("<", "<="):
        when_true, when_false = "<=", ">="
    else:
        when_true, when_false = ">=", "<="
    true_side = L.and_(L.pred(when_true, plus, bound), L.pred(when_true, minus, bound))
    false_side = L.and_(L.pred(when_false, plus, bound), L.pred(when_false, minus, bound))
    return _globally(L.implies(not_iota, L.and_(L.implies(d_atom, true_side),
                                                L.implies(L.not_(d_atom), false_side))))


# ============================================================================
# PUBLIC API
# ============================================================================

def _time_monitor(sig: Signature, delta: Node, zeta: Node) -> Node:
    time = L.time_()
    return L.conj([
        _eq(time, L.num(0)),
        _globally(_eq(L.sub(L.next_(time), time), delta)),
        _globally(L.pred(">=", delta, L.num(0))),
        _zeta_step(delta, zeta),
        _zeta_fair(zeta),
    ])


def _zeta_step(delta: Node, zeta: Node) -> Node:
    return _globally(L.or_(_eq(L.sub(L.next_(zeta), zeta), delta),
                           L.and_(L.pred(">=", zeta, L.num(1)), _eq(L.next_(zeta), L.num(0)))))


def _zeta_fair(zeta: Node) -> Node:
    return _globally(L.unary(Kind.F, L.and_(L.pred(">=", zeta, L.num(1)), _eq(L.next_(zeta), L.num(0)))))


def discretize(phi: Node, model: TimeModel, sig: Signature) -> DiscretizedProblem:
    """Equi-satisfiable discrete-time problem for a core formula."""
    if model is TimeModel.DISCRETE:
        symbols = L.free_symbols(phi)
        if not symbols.uses_time:
            sampling = SamplingVars(None, None, None)
            return DiscretizedProblem(phi, phi, L.true(), L.true(), sampling, model, STAGE_DISCRETE_INPUT, sig)
        delta = sig.fresh_var("delta", L.REAL)
        zeta = sig.fresh_var("zeta", L.REAL)
        monitor = _time_monitor(sig, delta, zeta)
        sampling = SamplingVars(None, delta.payload, zeta.payload)
        logging.info("Discrete time model: time monitor added")
        return DiscretizedProblem(L.and_(phi, monitor), phi, L.true(), monitor, sampling, model,
                                  STAGE_DISCRETE_INPUT, sig)

    iota = sig.fresh_var("iota", L.BOOL)
    delta = sig.fresh_var("delta", L.REAL)
    zeta = sig.fresh_var("zeta", L.REAL)
    sampling = SamplingVars(iota.payload, delta.payload, zeta.payload)
    rewrite = _Discretizer(sig, iota)
    d_formula = rewrite(phi)

    zero, positive = _eq(delta, L.num(0)), L.pred(">", delta, L.num(0))
    steps = [
        L.and_(iota, L.and_(positive, L.unary(Kind.X, L.not_(iota)))),
        L.and_(L.not_(iota), L.and_(positive, L.unary(Kind.X, iota))),
    ]
    if model is TimeModel.SUPER_DENSE:
        steps.insert(0, L.and_(iota, L.and_(zero, L.unary(Kind.X, iota))))
    psi_iota = L.conj([iota, _globally(L.disj(steps)), _zeta_step(delta, zeta), _zeta_fair(zeta)])

    time = L.time_()
    uniformity = [_uniformity(atom, rewrite, sig, iota)
                  for atom in L.subformulas(phi) if L.is_time_atom(atom)]
    psi_time = L.conj([_eq(time, L.num(0)), _globally(_eq(L.sub(L.next_(time), time), delta))] + uniformity)

    formula = L.conj([d_formula, psi_iota, psi_time])
    logging.info(f"Discretized ({model.value}): {L.node_count(phi)} -> {L.node_count(formula)} nodes, "
                 f"{len(uniformity)} uniformity constraints")
    return DiscretizedProblem(formula, d_formula, psi_iota, psi_time, sampling, model, STAGE_DISCRETE,
                              sig, uniformity)


def eliminate_prev(phi: Node, sig: Signature) -> Node:
    """Replace each prev(w) by a monitor variable m with m = def initially and G(next(m) = w)."""
    constraints: List[Node] = []

    class _Eliminate(L.Rewriter):
        def rewrite(self, node: Node, args: Tuple[Node, ...]) -> Node:
            if node.kind is not Kind.PREV:
                return L.rebuild(node, args)
            w = args[0]
            monitor = sig.fresh_var("m", w.sort, origin=node)
            default = L.param(node.payload, sig.params.get(node.payload, w.sort))
            constraints.append(_eq(monitor, default))
            constraints.append(_globally(_eq(L.next_(monitor), w)))
            return monitor

    result = _Eliminate(sig)(phi)
    if constraints:
        logging.debug(f"eliminate_prev: {len(constraints) // 2} monitors")
    return L.conj([result] + constraints)
