"""K-Liveness - proving that a transition system has no fair path

The system gets one "seen" bit per justice condition and a counter that
ticks whenever all conditions have been seen since the last tick. A fair
path ticks infinitely often, so proving the invariant `count < n` for
some n proves that no fair path exists. Invariants are proved by
k-induction strengthened with Houdini lemmas over boolean literals.

INVARIANTS:
1. A proof is reported only after its certificate (n, k, lemmas) was
   re-checked on a fresh solver session
2. A reachable violation of `count < n` only moves the search to n + 1
3. An unknown answer from the solver never turns into a proof
"""

import logging
import threading
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, Iterator, List, Optional, Tuple

from pysmt.fnode import FNode

from backend.fts import FTS
from backend.smt import StepEncoder
from backend.solver import SolverSession
from core import logic as L
from core.errors import CancelledError
from core.logic import Node
from core.printer import pretty

SessionFactory = Callable[[str], SolverSession]


@dataclass
class Certificate:
    """Counter bound n, induction depth k and the lemmas used in the step case."""
    counter_bound: int
    depth: int
    lemmas: List[Node] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {"n": self.counter_bound, "k": self.depth,
                "lemmas": [pretty(lemma) for lemma in self.lemmas]}


@dataclass
class ProofResult:
    proved: Optional[bool]                 # True: no fair path; None: inconclusive
    certificate: Optional[Certificate] = None
    reason: str = ""
    bounds_tried: List[Tuple[int, int]] = field(default_factory=list)


@dataclass
class CounterSystem:
    fts: FTS
    counter: Node
    seen: List[Node]

    def below(self, n: int) -> Node:
        return L.pred("<", self.counter, L.num(n, L.INT))


def counter_system(fts: FTS) -> CounterSystem:
    """fts extended with seen bits and the acceptance counter."""
    sig = fts.signature.copy()
    seen = [sig.fresh_var("seen", L.BOOL) for _ in fts.justice]
    counter = sig.fresh_var("cnt", L.INT)
    accept = L.conj([L.or_(s, j) for s, j in zip(seen, fts.justice)])
    init = [fts.init, L.pred("=", counter, L.num(0, L.INT))] + [L.not_(s) for s in seen]
    trans = [fts.trans, L.pred("=", L.next_(counter),
                               L.add(counter, L.ite(accept, L.num(1, L.INT), L.num(0, L.INT))))]
    for s, j in zip(seen, fts.justice):
        trans.append(L.iff(L.next_(s), L.and_(L.not_(accept), L.or_(s, j))))
    state_vars = dict(fts.state_vars)
    for s in seen:
        state_vars[s.payload] = L.BOOL
    state_vars[counter.payload] = L.INT
    extended = replace(fts, signature=sig, state_vars=state_vars,
                       init=L.conj(init), trans=L.conj(trans))
    return CounterSystem(extended, counter, seen)


class _Unroller:
    """Path unrolling of a counter system on one session (no loop constraints)."""

    def __init__(self, system: CounterSystem, session: SolverSession, with_init: bool):
        self.fts = system.fts
        self.session = session
        self.mgr = session.mgr
        self.enc = StepEncoder(session.env, self.fts.signature)
        self.steps = 0
        session.declare(self.enc.rigids(self.fts.params, self.fts.functions))
        session.declare(self.enc.states(self.fts.state_vars, 0))
        if with_init:
            session.add_assertion(self.enc.formula(self.fts.init, 0))

    def at(self, node: Node, step: int) -> FNode:
        return self.enc.formula(node, step)

    def extend(self) -> None:
        i = self.steps
        self.session.declare(self.enc.states(self.fts.state_vars, i + 1))
        self.session.add_assertion(self.enc.formula(self.fts.trans, i))
        self.steps += 1

    def distinct_from_all(self, step: int) -> FNode:
        """State `step` differs from every earlier state."""
        mgr = self.mgr
        parts = []
        for j in range(step):
            same = [mgr.EqualsOrIff(self.enc.state(v, step, s), self.enc.state(v, j, s))
                    for v, s in self.fts.state_vars.items()]
            parts.append(mgr.Not(mgr.And(same)))
        return mgr.And(parts)

    @contextmanager
    def query(self, *extra: FNode) -> Iterator[Optional[bool]]:
        """Answer for the unrolling plus extra; the model is readable inside the block."""
        with self.session.scope():
            for formula in extra:
                self.session.add_assertion(formula)
            yield self.session.check()

    def ask(self, *extra: FNode) -> Optional[bool]:
        with self.query(*extra) as answer:
            return answer

    def holds(self, nodes: List[Node], step: int) -> List[bool]:
        """Truth of each node at step in the current model, from the values of its symbols."""
        env = self.session.env
        formulas = [self.at(node, step) for node in nodes]
        symbols = sorted({s for f in formulas for s in env.fvo.get_free_variables(f)},
                         key=lambda s: s.symbol_name())
        model = dict(zip(symbols, self.session.get_values(symbols)))
        return [env.simplifier.simplify(env.substituter.substitute(f, model)).is_true() for f in formulas]


def _cancelled(cancel: Optional[threading.Event]) -> None:
    if cancel is not None and cancel.is_set():
        raise CancelledError("k-liveness cancelled")


# ============================================================================
# HOUDINI LEMMAS
# ============================================================================

def _candidates(system: CounterSystem) -> List[Node]:
    result: List[Node] = []
    for name, sort in system.fts.state_vars.items():
        if sort == L.BOOL:
            v = L.var(name, L.BOOL)
            result.extend([v, L.not_(v)])
    result.append(L.pred(">=", system.counter, L.num(0, L.INT)))
    return result


def houdini(system: CounterSystem, session: SolverSession,
            cancel: Optional[threading.Event] = None) -> List[Node]:
    """Largest subset of the candidate literals that is an inductive invariant."""
    lemmas = _candidates(system)
    initial = _Unroller(system, session, with_init=True)
    while lemmas:
        _cancelled(cancel)
        with initial.query(initial.mgr.Not(initial.mgr.And([initial.at(c, 0) for c in lemmas]))) as answer:
            if answer is None:
                return []
            if not answer:
                break
            lemmas = [c for c, ok in zip(lemmas, initial.holds(lemmas, 0)) if ok]

    with session.scope():
        step = _Unroller(system, session, with_init=False)
        step.extend()
        mgr = step.mgr
        while lemmas:
            _cancelled(cancel)
            with step.query(mgr.And([step.at(c, 0) for c in lemmas]),
                            mgr.Not(mgr.And([step.at(c, 1) for c in lemmas]))) as answer:
                if answer is None:
                    lemmas = []
                    break
                if not answer:
                    break
                lemmas = [c for c, ok in zip(lemmas, step.holds(lemmas, 1)) if ok]
    logging.info(f"Houdini: {len(lemmas)} inductive lemmas")
    return lemmas


# ============================================================================
# K-INDUCTION
# ============================================================================

def _kinduction(system: CounterSystem, n: int, lemmas: List[Node], k_max: int,
                sessions: SessionFactory, cancel: Optional[threading.Event],
                tried: List[Tuple[int, int]]) -> Tuple[str, int]:
    """("proved", k), ("violated", k) or ("open", k) for the invariant count < n."""
    prop = system.below(n)
    with sessions(f"base-n{n}") as base_session, sessions(f"step-n{n}") as step_session:
        base = _Unroller(system, base_session, with_init=True)
        step = _Unroller(system, step_session, with_init=False)
        for k in range(k_max + 1):
            _cancelled(cancel)
            tried.append((n, k))
            answer = base.ask(base.mgr.Not(base.at(prop, k)))
            if answer is None:
                return "open", k
            if answer:
                logging.debug(f"k-liveness: count reaches {n} within {k} steps")
                return "violated", k

            mgr = step.mgr
            lemma_k = [step.at(c, k) for c in lemmas]
            answer = step.ask(mgr.And(lemma_k), mgr.Not(step.at(prop, k)))
            if answer is False:
                return "proved", k

            base.extend()
            step_session.add_assertion(step.at(prop, k))
            for c in lemmas:
                step_session.add_assertion(step.at(c, k))
            step.extend()
            step_session.add_assertion(step.distinct_from_all(k + 1))
    return "open", k_max


def recheck_certificate(system: CounterSystem, certificate: Certificate,
                        sessions: SessionFactory) -> bool:
    """Independent check of lemmas, base cases and step case on fresh sessions."""
    n, k, lemmas = certificate.counter_bound, certificate.depth, certificate.lemmas
    prop = system.below(n)

    with sessions("recheck-base") as session:
        path = _Unroller(system, session, with_init=True)
        mgr = path.mgr
        if lemmas and path.ask(mgr.Not(mgr.And([path.at(c, 0) for c in lemmas]))) is not False:
            return False
        for j in range(k + 1):
            if path.ask(mgr.Not(path.at(prop, j))) is not False:
                return False
            path.extend()

    if lemmas:
        with sessions("recheck-lemmas") as session:
            free = _Unroller(system, session, with_init=False)
            free.extend()
            mgr = free.mgr
            if free.ask(mgr.And([free.at(c, 0) for c in lemmas]),
                        mgr.Not(mgr.And([free.at(c, 1) for c in lemmas]))) is not False:
                return False

    with sessions("recheck-step") as session:
        step = _Unroller(system, session, with_init=False)
        for j in range(k):
            session.add_assertion(step.at(prop, j))
            step.extend()
        for j in range(k + 1):
            for c in lemmas:
                session.add_assertion(step.at(c, j))
            session.add_assertion(step.distinct_from_all(j))
        return step.ask(step.mgr.Not(step.at(prop, k))) is False


def prove_no_fair_path(fts: FTS, sessions: SessionFactory, n_max: int, k_max: int,
                       cancel: Optional[threading.Event] = None,
                       use_lemmas: bool = True) -> ProofResult:
    """k-liveness: try count < n for n = 1..n_max, each by k-induction up to depth k_max."""
    system = counter_system(fts)
    lemmas: List[Node] = []
    if use_lemmas:
        with sessions("houdini") as session:
            lemmas = houdini(system, session, cancel)

    tried: List[Tuple[int, int]] = []
    for n in range(1, n_max + 1):
        outcome, k = _kinduction(system, n, lemmas, k_max, sessions, cancel, tried)
        if outcome == "violated":
            continue
        if outcome == "proved":
            certificate = Certificate(n, k, lemmas)
            if recheck_certificate(system, certificate, sessions):
                logging.info(f"k-liveness: no fair path (n={n}, k={k}, {len(lemmas)} lemmas)")
                return ProofResult(True, certificate, bounds_tried=tried)
            logging.warning(f"k-liveness: certificate n={n}, k={k} failed its re-check")
            return ProofResult(None, None, f"certificate n={n}, k={k} failed its re-check", tried)
        logging.debug(f"k-liveness: count < {n} not proved up to k={k_max}")
    return ProofResult(None, None, f"no proof with n <= {n_max} and k <= {k_max}", tried)
