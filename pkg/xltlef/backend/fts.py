"""Transition System - symbolic fair transition system for an LTL-with-next problem

A tableau gives every temporal subformula (and every atom that looks one
step ahead) a boolean monitor variable. The formula then reduces to a
condition on the first state, a transition relation over current and
next values, and justice conditions that must hold infinitely often.

INVARIANTS:
1. init, trans and every justice condition mention next only in trans
2. Fair paths of the system are exactly the models of the input formula
3. Drift variables (time and clocks) are the only variables allowed to
   change across a loop; stable_atoms lists the atoms that see them
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Tuple

from backend.clocks import TIME_NAME, clock_normalize
from core import logic as L
from core.discretize import SamplingVars
from core.errors import StageError
from core.logic import FunctionDecl, Kind, Node, Signature, Sort
from core.removal import LtlNextProblem

DRIFT_TIME = "time"
DRIFT_CLOCK = "clock"


@dataclass
class FTS:
    signature: Signature
    state_vars: Dict[str, Sort]
    params: Dict[str, Sort]
    functions: Dict[str, FunctionDecl]
    init: Node
    trans: Node
    justice: List[Node]
    drift: Dict[str, str] = field(default_factory=dict)            # name -> time | clock
    stable_atoms: List[Tuple[Node, Dict[str, Fraction]]] = field(default_factory=list)
    monitors: List[str] = field(default_factory=list)
    sampling: SamplingVars = field(default_factory=lambda: SamplingVars(None, None, None))
    problem: LtlNextProblem = None

    @property
    def frame_vars(self) -> List[str]:
        """State variables that must repeat exactly around a loop."""
        return [v for v in self.state_vars if v not in self.drift]

    @property
    def step_var(self) -> str:
        """Name of the sampling step variable when it is part of the state."""
        delta = self.sampling.delta
        return delta if delta in self.state_vars else None

    def summary(self) -> str:
        return (f"{len(self.state_vars)} state vars ({len(self.monitors)} monitors), "
                f"{len(self.params)} params, {len(self.justice)} justice, "
                f"{len(self.drift)} drifting, {len(self.stable_atoms)} stable atoms")


class _Prime(L.Rewriter):
    """Current-state formula read one step ahead."""

    def rewrite(self, node: Node, args: Tuple[Node, ...]) -> Node:
        if node.kind in (Kind.VAR, Kind.TIME):
            return L.next_(node)
        if node.kind is Kind.NEXT:
            raise StageError("next of a next in the transition relation")
        return L.rebuild(node, args)


class _Tableau:

    def __init__(self, problem: LtlNextProblem):
        self.problem = problem
        self.sig = problem.signature
        self.init: List[Node] = []
        self.trans: List[Node] = []
        self.justice: List[Node] = []
        self.monitors: List[str] = []
        self.stable: Dict[Node, Dict[str, Fraction]] = {}
        self._memo: Dict[int, Node] = {}
        self._prime = _Prime()

    def primed(self, node: Node) -> Node:
        return self._prime(node)

    def monitor(self) -> Node:
        m = self.sig.fresh_var("t", L.BOOL)
        self.monitors.append(m.payload)
        return m

    def enc(self, node: Node) -> Node:
        done = self._memo.get(node.id)
        if done is None:
            done = self._enc(node)
            self._memo[node.id] = done
        return done

    def _enc(self, node: Node) -> Node:
        kind = node.kind
        if not node.args:
            return node
        if kind is Kind.PRED:
            atom = L.rebuild(node, tuple(self.enc(a) for a in node.args))
            rates = self.problem.drift_atoms.get(node)
            if rates:
                self.stable.setdefault(atom, rates)
            if L.contains_kind(atom, {Kind.NEXT}):
                m = self.monitor()
                self.trans.append(L.iff(m, atom))
                return m
            return atom
        if kind is Kind.NEXT:
            inner = self.enc(node.args[0])
            if L.contains_kind(inner, {Kind.NEXT}):
                raise StageError("nested next in an LTL-with-next formula")
            return self.primed(inner)
        if kind in (Kind.NOT, Kind.AND, Kind.OR, Kind.IMPLIES, Kind.IFF, Kind.APPLY, Kind.ITE):
            return L.rebuild(node, tuple(self.enc(a) for a in node.args))
        if kind in L.TEMPORAL_KINDS:
            return self._temporal(node)
        raise StageError(f"unexpected {kind.value} in an LTL-with-next formula")

    def _temporal(self, node: Node) -> Node:
        kind = node.kind
        args = [self.enc(a) for a in node.args]
        m = self.monitor()
        nxt = self.primed(m)
        if kind is Kind.X:
            self.trans.append(L.iff(m, self.primed(args[0])))
        elif kind is Kind.Y:
            self.init.append(L.not_(m))
            self.trans.append(L.iff(nxt, args[0]))
        elif kind is Kind.Z:
            self.init.append(m)
            self.trans.append(L.iff(nxt, args[0]))
        elif kind is Kind.UNTIL:
            e1, e2 = args
            self.trans.append(L.iff(m, L.or_(e2, L.and_(e1, nxt))))
            self.justice.append(L.or_(L.not_(m), e2))
        elif kind is Kind.F:
            self.trans.append(L.iff(m, L.or_(args[0], nxt)))
            self.justice.append(L.or_(L.not_(m), args[0]))
        elif kind is Kind.G:
            self.trans.append(L.iff(m, L.and_(args[0], nxt)))
            self.justice.append(L.or_(m, L.not_(args[0])))
        elif kind is Kind.SINCE:
            e1, e2 = args
            self.init.append(L.iff(m, e2))
            self.trans.append(L.iff(nxt, L.or_(self.primed(e2), L.and_(self.primed(e1), m))))
        elif kind is Kind.P:
            self.init.append(L.iff(m, args[0]))
            self.trans.append(L.iff(nxt, L.or_(self.primed(args[0]), m)))
        elif kind is Kind.H:
            self.init.append(L.iff(m, args[0]))
            self.trans.append(L.iff(nxt, L.and_(self.primed(args[0]), m)))
        else:
            raise StageError(f"{kind.value} is not an LTL-with-next operator; run the pipeline first")
        return m


def build_fts(problem: LtlNextProblem) -> FTS:
    """Fair transition system whose fair paths are the models of the problem formula."""
    if not problem.normalized:
        problem = clock_normalize(problem)
    sig = problem.signature
    tableau = _Tableau(problem)
    top = tableau.enc(problem.formula)
    init = L.conj([top] + tableau.init)
    trans = L.conj(tableau.trans)
    justice = list(dict.fromkeys(tableau.justice))

    state_vars: Dict[str, Sort] = {}
    params: Dict[str, Sort] = {}
    functions: Dict[str, FunctionDecl] = {}
    for root in [init, trans] + justice:
        for node in L.iter_dag(root):
            if node.kind is Kind.VAR:
                state_vars.setdefault(node.payload, sig.state_vars.get(node.payload, node.sort))
            elif node.kind is Kind.TIME:
                state_vars.setdefault(TIME_NAME, L.REAL)
            elif node.kind is Kind.PARAM:
                params.setdefault(node.payload, sig.params.get(node.payload, node.sort))
            elif node.kind is Kind.APPLY and node.payload in sig.functions:
                functions.setdefault(node.payload, sig.functions[node.payload])

    drift: Dict[str, str] = {}
    if TIME_NAME in state_vars:
        drift[TIME_NAME] = DRIFT_TIME
    for clock in problem.clocks.values():
        if clock in state_vars:
            drift[clock] = DRIFT_CLOCK

    fts = FTS(sig, state_vars, params, functions, init, trans, justice, drift,
              list(tableau.stable.items()), tableau.monitors, problem.sampling, problem)
    logging.info(f"FTS built: {fts.summary()}")
    return fts
