"""Lasso BMC - bounded search for fair lassos of a transition system

States 0..k-1 are unrolled, state k is the image of the loop-start state
l under one more pass around the loop. Frame variables repeat exactly;
time grows by the loop duration and each clock either repeats or (when its
variable is frozen over the loop) shrinks by it. Atoms that see a drifting
variable must already sit at the truth value they keep forever.

INVARIANTS:
1. init and trans are asserted once per step; loop constraints live in a
   push/pop frame of their own, so bounds are checked incrementally
2. Exactly one loop selector is true in every model
3. A reported lasso satisfies init, trans at every step and every justice
   condition somewhere in the loop
"""

import logging
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from pysmt.fnode import FNode
from pysmt.typing import INT as SMT_INT

from backend.fts import DRIFT_TIME, FTS
from backend.smt import StepEncoder, function_tables
from backend.solver import SolverSession
from core import logic as L
from core.errors import CancelledError, TraceError
from oracle.traces import DiscreteLassoTrace, Value

# truth value an atom keeps once its difference drifts to +inf / -inf:
# the strict comparisons below must hold for it to never change again
_STRICT_AT_PLUS = {"=", "<=", ">"}
_STRICT_AT_MINUS = {"=", "<", ">="}


@dataclass
class Lasso:
    """A fair lasso read from a model: states 0..k-1, loop back to loop_start."""
    states: List[Dict[str, Value]]
    loop_start: int
    loop_image: Dict[str, Value]
    params: Dict[str, Value] = field(default_factory=dict)
    functions: Dict[str, Dict[Tuple[Value, ...], Value]] = field(default_factory=dict)
    frozen: Dict[str, bool] = field(default_factory=dict)

    @property
    def bound(self) -> int:
        return len(self.states)

    def to_trace(self, fts: FTS) -> DiscreteLassoTrace:
        """Discrete trace with timestamps from the sampling step and clocks mapped back."""
        delta = fts.step_var
        k, l = len(self.states), self.loop_start
        times = [Fraction(0)]
        if delta is not None:
            for state in self.states:
                times.append(times[-1] + Fraction(state.get(delta, 0)))
            shift = times[k] - times[l]
        else:
            times = [Fraction(i) for i in range(k + 1)]
            shift = Fraction(k - l)
        problem = fts.problem
        clocks = problem.clocks if problem is not None else {}
        states = []
        for i, state in enumerate(self.states):
            row = {name: v for name, v in state.items() if name != DRIFT_TIME}
            for original, clock in clocks.items():
                if clock in state:
                    row[original] = times[i] + state[clock]
            states.append(row)
        try:
            return DiscreteLassoTrace(states, l, times[:k], dict(self.params),
                                      dict(self.functions), shift=shift)
        except TraceError as e:
            raise TraceError(f"lasso from the solver is not a trace: {e}")


@dataclass
class BmcResult:
    found: Optional[bool]          # True: lasso found, None: nothing within the bound
    lasso: Optional[Lasso]
    bound: int
    reason: str = ""


class LassoEncoder:
    """Incremental lasso unrolling of one FTS on one solver session."""

    def __init__(self, fts: FTS, session: SolverSession):
        self.fts = fts
        self.session = session
        self.mgr = session.mgr
        self.enc = StepEncoder(session.env, fts.signature)
        self.steps = 0

    def state(self, name: str, step: int) -> FNode:
        return self.enc.state(name, step, self.fts.state_vars[name])

    def start(self) -> None:
        fts = self.fts
        self.session.declare(self.enc.rigids(fts.params, fts.functions))
        self.session.declare(self.enc.states(fts.state_vars, 0))
        self.session.add_assertion(self.enc.formula(fts.init, 0))

    def extend(self) -> None:
        """Add the transition from the last state to a new one."""
        i = self.steps
        self.session.declare(self.enc.states(self.fts.state_vars, i + 1))
        self.session.add_assertion(self.enc.formula(self.fts.trans, i))
        self.steps += 1

    def loop(self, k: int) -> Tuple[FNode, List[FNode], Dict[str, FNode]]:
        """Constraints closing a loop from state k back to one of 0..k-1."""
        mgr = self.mgr
        fts = self.fts
        selectors = [mgr.Symbol(f"!loop_{k}_{l}") for l in range(k)]
        in_loop = [mgr.Or(selectors[:i + 1]) for i in range(k)]
        frozen = {name: mgr.Symbol(f"!frz_{name}_{k}") for name, kind in fts.drift.items()
                  if kind != DRIFT_TIME and fts.step_var is not None}
        parts = [mgr.ExactlyOne(selectors)]

        delta = fts.step_var
        duration = None
        if delta is not None:
            duration = mgr.Plus([mgr.Ite(in_loop[i], self.state(delta, i), mgr.Real(0)) for i in range(k)])
            parts.append(mgr.GT(duration, mgr.Real(0)))
        drifting = fts.drift if duration is not None else {}
        frame = [v for v in fts.state_vars if v not in drifting]

        for l, selector in enumerate(selectors):
            same = [mgr.EqualsOrIff(self.state(v, k), self.state(v, l)) for v in frame]
            for name in drifting:
                if name in frozen:
                    moved = mgr.Minus(self.state(name, l), mgr.Ite(frozen[name], duration, mgr.Real(0)))
                else:
                    moved = mgr.Plus(self.state(name, l), duration)
                same.append(mgr.Equals(self.state(name, k), moved))
            parts.append(mgr.Implies(selector, mgr.And(same)))

        if drifting:
            for atom, rates in fts.stable_atoms:
                rate = self._rate(rates, frozen)
                if rate is None:
                    continue
                diff_node = L.sub(atom.args[0], atom.args[1])
                op = atom.payload
                for i in range(k):
                    diff = self._real(self.enc.term(diff_node, i))
                    plus = mgr.GT(diff, mgr.Real(0)) if op in _STRICT_AT_PLUS else mgr.GE(diff, mgr.Real(0))
                    minus = mgr.LT(diff, mgr.Real(0)) if op in _STRICT_AT_MINUS else mgr.LE(diff, mgr.Real(0))
                    parts.append(mgr.Implies(in_loop[i], mgr.And(
                        mgr.Implies(mgr.GT(rate, mgr.Real(0)), plus),
                        mgr.Implies(mgr.LT(rate, mgr.Real(0)), minus))))

        for condition in fts.justice:
            parts.append(mgr.Or([mgr.And(in_loop[i], self.enc.formula(condition, i)) for i in range(k)]))
        return mgr.And(parts), selectors, frozen

    def _real(self, term: FNode) -> FNode:
        return self.mgr.ToReal(term) if self.session.env.stc.get_type(term) is SMT_INT else term

    def _rate(self, rates: Dict[str, Fraction], frozen: Dict[str, FNode]) -> Optional[FNode]:
        """Drift of an atom's difference per unit of loop time."""
        mgr = self.mgr
        terms = []
        for name, coef in rates.items():
            if self.fts.drift.get(name) == DRIFT_TIME:
                terms.append(mgr.Real(coef))
            elif name in frozen:
                terms.append(mgr.Ite(frozen[name], mgr.Real(-coef), mgr.Real(0)))
        return mgr.Plus(terms) if terms else None

    def read(self, k: int, selectors: List[FNode], frozen: Dict[str, FNode]) -> Lasso:
        """Lasso of the current model; only symbols are asked for, in one request."""
        fts = self.fts
        names = list(fts.state_vars)
        width = len(names)
        rows = [self.state(v, i) for i in range(k + 1) for v in names]
        params = [self.enc.rigid(p, s) for p, s in fts.params.items()]
        values = self.session.get_py_values(selectors + rows + params + list(frozen.values()))
        chosen, values = values[:k], values[k:]
        cells, values = values[:len(rows)], values[len(rows):]
        states = [dict(zip(names, cells[i * width:(i + 1) * width])) for i in range(k + 1)]
        image = states.pop()
        param_values = dict(zip(fts.params, values[:len(params)]))
        flags = {name: bool(v) for name, v in zip(frozen, values[len(params):])}
        functions = function_tables(self.enc, self.session)
        return Lasso(states, chosen.index(True), image, param_values, functions, flags)


def check_sat_bmc(fts: FTS, k_max: int, session: SolverSession,
                  cancel: Optional[threading.Event] = None, k_min: int = 1) -> BmcResult:
    """Shortest fair lasso with at most k_max states, if there is one."""
    encoder = LassoEncoder(fts, session)
    encoder.start()
    unknown = 0
    for k in range(1, k_max + 1):
        if cancel is not None and cancel.is_set():
            raise CancelledError("bmc cancelled")
        encoder.extend()
        if k < k_min:
            continue
        constraint, selectors, frozen = encoder.loop(k)
        with session.scope():
            session.declare(selectors + list(frozen.values()))
            session.add_assertion(constraint)
            answer = session.check()
            lasso = encoder.read(k, selectors, frozen) if answer else None
        if lasso is not None:
            logging.info(f"BMC: fair lasso with {k} states, loop at {lasso.loop_start}")
            return BmcResult(True, lasso, k)
        if answer is None:
            unknown += 1
            logging.warning(f"BMC: solver answered unknown at k={k}")
        else:
            logging.debug(f"BMC: no lasso with {k} states")
    reason = f"no fair lasso with up to {k_max} states"
    if unknown:
        reason += f" ({unknown} bounds unknown)"
    return BmcResult(None, None, k_max, reason)
