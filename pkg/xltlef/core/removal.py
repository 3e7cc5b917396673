"""EF Removal - event-freezing terms replaced by prophecy variables

Each u@F(phi) / u@P(phi) becomes a fresh state variable p constrained by
a temporal formula R. Terms are removed innermost first; the result is
LTL with next over the original signature plus the new variables.

INVARIANTS:
1. Output contains no event-freezing terms and no prev
2. Bindings are listed in removal order, which is deterministic for a given input
3. Each prophecy variable uses the default constant of the term it replaces
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Tuple

from core import logic as L
from core.discretize import STAGE_DISCRETE, STAGE_DISCRETE_INPUT, SamplingVars, eliminate_prev
from core.errors import StageError
from core.logic import Kind, Node, Signature

_REMOVABLE = (Kind.AT_NEXT_NS, Kind.AT_LAST_NS)


@dataclass(frozen=True)
class ProphecyBinding:
    ef_term: Node
    var: str
    default: str
    direction: str      # future | past


@dataclass
class LtlNextProblem:
    """Discrete LTL with next: the input of the model-checking backend."""
    formula: Node
    signature: Signature
    bindings: List[ProphecyBinding] = field(default_factory=list)
    sampling: SamplingVars = field(default_factory=lambda: SamplingVars(None, None, None))
    constraints: List[Node] = field(default_factory=list)
    # filled by clock_normalize
    clocks: Dict[str, str] = field(default_factory=dict)
    countdowns: Dict[str, Node] = field(default_factory=dict)
    drift_atoms: Dict[Node, Dict[str, Fraction]] = field(default_factory=dict)
    keeps_time: bool = False
    normalized: bool = False


def order_ef_terms(psi: Node) -> List[Node]:
    """Event-freezing terms of psi, innermost first, then in source order."""
    return [n for n in L.iter_dag(psi) if n.kind in _REMOVABLE]


class _Normalize(L.Rewriter):
    """Strict operators of a discrete-input formula in terms of X, Y, next and prev."""

    def __init__(self, sig: Signature):
        super().__init__()
        self.sig = sig

    def rewrite(self, node: Node, args: Tuple[Node, ...]) -> Node:
        kind = node.kind
        if kind is Kind.UNTIL_S:
            return L.unary(Kind.X, L.binary(Kind.UNTIL, *args))
        if kind is Kind.SINCE_S:
            return L.unary(Kind.Y, L.binary(Kind.SINCE, *args))
        if kind is Kind.AT_NEXT:
            ns = L.at_next_ns(*args)
            self.sig.alias_default(ns, node)
            return L.next_(ns)
        if kind is Kind.AT_LAST:
            ns = L.at_last_ns(*args)
            self.sig.alias_default(ns, node)
            return L.prev_(ns, self.sig.default_for(node))
        return L.rebuild(node, args)


def _constraint(term: Node, p: Node, default: Node) -> Node:
    u, phi = term.args
    keep = L.pred("=", L.next_(p), p)
    if term.kind is Kind.AT_NEXT_NS:
        track = L.implies(L.unary(Kind.F, phi),
                          L.binary(Kind.UNTIL, L.and_(L.not_(phi), keep), L.and_(phi, L.pred("=", p, u))))
        missing = L.implies(L.unary(Kind.G, L.not_(phi)), L.pred("=", p, default))
    else:
        track = L.implies(L.unary(Kind.P, phi),
                          L.binary(Kind.SINCE, L.and_(L.not_(phi), L.unary(Kind.Z, keep)),
                                   L.and_(phi, L.pred("=", p, u))))
        missing = L.implies(L.unary(Kind.H, L.not_(phi)), L.pred("=", p, default))
    return L.and_(L.unary(Kind.G, track), L.unary(Kind.G, missing))


def remove_ef(psi: Node, sig: Signature, stage: str = STAGE_DISCRETE,
              sampling: SamplingVars = None) -> LtlNextProblem:
    """LTL-with-next problem equi-satisfiable with psi."""
    if stage == STAGE_DISCRETE_INPUT:
        psi = _Normalize(sig)(psi)
    elif stage != STAGE_DISCRETE:
        raise StageError(f"remove_ef cannot take input at stage '{stage}'")
    strict = [n.kind.value for n in L.iter_dag(psi) if n.kind in (Kind.UNTIL_S, Kind.SINCE_S, Kind.AT_NEXT, Kind.AT_LAST)]
    if strict:
        raise StageError(f"strict operators left in a discretized formula: {', '.join(sorted(set(strict)))}")
    psi = eliminate_prev(psi, sig)

    bindings: List[ProphecyBinding] = []
    constraints: List[Node] = []
    while True:
        terms = order_ef_terms(psi)
        if not terms:
            break
        term = terms[0]
        default_name = sig.default_for(term)
        default = L.param(default_name, sig.params.get(default_name, term.sort))
        p = sig.fresh_var("p", term.sort, origin=term)
        direction = "future" if term.kind is Kind.AT_NEXT_NS else "past"
        bindings.append(ProphecyBinding(term, p.payload, default_name, direction))
        constraints.append(_constraint(term, p, default))
        psi = L.substitute(psi, {term: p}, sig)

    result = L.conj([psi] + constraints)
    if L.contains_kind(result, L.EF_KINDS | {Kind.PREV}):
        raise StageError("event-freezing terms left after removal")
    logging.info(f"EF removal: {len(bindings)} prophecy variables, {L.node_count(result)} nodes")
    return LtlNextProblem(result, sig, bindings, sampling or SamplingVars(None, None, None), constraints)
