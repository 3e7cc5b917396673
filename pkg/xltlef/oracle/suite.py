"""Property Suite - randomized cross-checks of every translation stage

    metric       direct metric/event-clock/counting semantics vs the encoding
    removal      EF removal on traces extended with the prophecy values
    discretize   interval traces sampled into models of the discretized formula
    reconstruct  backend models of dense problems replay as interval traces
    coherence    eval_dense on singular-point traces vs eval_discrete
    agreement    brute force vs lasso BMC on small propositional formulas
    roundtrip    pretty followed by parse_formula is the identity

Case i of suite s draws everything from random.Random(f"{seed}:{s}:{i}"),
so a failure is reproducible from (seed, suite, case index) alone.

INVARIANTS:
1. A failing case is reported with a shrunk trace and formula
2. Cases that hit an unsupported fragment are skipped, never passed
3. Suites that need a solver are skipped when none is installed
"""

import logging
import random
import shutil
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence

from core import logic as L
from core.desugar import to_core
from core.discretize import STAGE_DISCRETE_INPUT, discretize
from core.errors import EncodingError, WitnessError, XltlefError
from core.logic import Node, Signature, TimeModel
from core.parser import ProblemFile, parse_formula
from core.printer import pretty
from core.removal import remove_ef
from core.sortcheck import register_defaults
from core.settings import RunConfig, get_settings
from oracle.brute_force import TraceBounds, brute_force_sat
from oracle.constructions import sample_trace
from oracle.evaluator import eval_dense, eval_discrete, eval_term
from oracle.generators import (FormulaGenerator, random_discrete_trace, random_interval_trace,
                               shrink, suite_signature, unit_point_trace, unroll)
from oracle.traces import DiscreteLassoTrace

SUITES = ("metric", "removal", "discretize", "reconstruct", "coherence", "agreement", "roundtrip")
SOLVER_SUITES = ("reconstruct", "agreement")


class Skip(Exception):
    """The case is outside the fragment the suite checks."""


@dataclass
class Failure:
    suite: str
    case_index: int
    formula: str
    trace: Optional[Dict[str, Any]]
    message: str

    def to_dict(self) -> Dict[str, Any]:
        return {"suite": self.suite, "case": self.case_index, "formula": self.formula,
                "trace": self.trace, "message": self.message}


@dataclass
class SuiteResult:
    name: str
    passed: int = 0
    failed: int = 0
    skipped: int = 0
    failures: List[Failure] = field(default_factory=list)
    note: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "passed": self.passed, "failed": self.failed,
                "skipped": self.skipped, "note": self.note,
                "failures": [f.to_dict() for f in self.failures]}


@dataclass
class SuiteReport:
    seed: int
    cases: int
    results: List[SuiteResult]

    @property
    def ok(self) -> bool:
        return all(r.failed == 0 for r in self.results)

    def summary(self) -> str:
        lines = [f"seed {self.seed}, {self.cases} cases per suite"]
        for r in self.results:
            line = f"  {r.name:<12} {r.passed} passed, {r.failed} failed, {r.skipped} skipped"
            lines.append(f"{line} ({r.note})" if r.note else line)
            for f in r.failures[:3]:
                lines.append(f"    case {f.case_index}: {f.message}\n      {f.formula}")
        lines.append("OK" if self.ok else "FAILED")
        return "\n".join(lines)

    def to_dict(self) -> Dict[str, Any]:
        return {"seed": self.seed, "cases": self.cases, "ok": self.ok,
                "results": [r.to_dict() for r in self.results]}


class CaseFailure(Exception):
    """A counterexample, with the predicate shrinking keeps true."""

    def __init__(self, formula: Node, trace: Optional[DiscreteLassoTrace], message: str,
                 fails: Optional[Callable[[object, Node], bool]] = None):
        super().__init__(message)
        self.formula = formula
        self.trace = trace
        self.message = message
        self.fails = fails


# ============================================================================
# CASES
# ============================================================================

def _positions(trace: DiscreteLassoTrace) -> range:
    return range(len(trace) + trace.loop_length)


def _metric_case(rng: random.Random, config: RunConfig) -> None:
    family = rng.choice(("mtl", "ectl", "tlc"))
    sig = suite_signature()
    phi = FormulaGenerator(rng, family, min(config.max_depth, 4), TimeModel.DISCRETE).formula()
    trace = random_discrete_trace(rng)
    try:
        core = to_core(phi, TimeModel.DISCRETE, sig)
    except EncodingError:
        raise Skip()

    def fails(t, f) -> bool:
        encoded = to_core(f, TimeModel.DISCRETE, sig)
        return any(eval_discrete(t, i, f, sig) != eval_discrete(t, i, encoded, sig) for i in _positions(t))

    for i in _positions(trace):
        direct, encoded = eval_discrete(trace, i, phi, sig), eval_discrete(trace, i, core, sig)
        if direct != encoded:
            raise CaseFailure(phi, trace, f"{family}: direct {direct}, encoded {encoded} at position {i}", fails)


def extend_with_prophecies(trace: DiscreteLassoTrace, sig: Signature, names: Sequence[str],
                           rounds: int = 4) -> DiscreteLassoTrace:
    """trace unrolled and extended with the value of every fresh variable's origin.

    Raises Skip when a value is not yet periodic after `rounds` loop iterations.
    """
    base = unroll(trace, rounds)
    states = [dict(s) for s in base.states]
    extended = base
    for name in names:
        origin = sig.origins[name]
        width = extended.loop_length
        values = [eval_term(extended, i, origin, sig) for i in range(len(extended) + width)]
        if values[extended.loop_start:len(extended)] != values[len(extended):]:
            raise Skip()
        for i, state in enumerate(states):
            state[name] = values[i]
        extended = DiscreteLassoTrace(states, base.loop_start, base.timestamps, dict(base.params),
                                      dict(base.functions), shift=base.shift)
    return extended


def _removal_case(rng: random.Random, config: RunConfig) -> None:
    sig = suite_signature()
    phi = FormulaGenerator(rng, "ef", min(config.max_depth, 4)).formula()
    trace = random_discrete_trace(rng, timed=False)
    removal_sig = sig.copy()
    register_defaults(phi, removal_sig)
    before = set(removal_sig.state_vars)
    problem = remove_ef(phi, removal_sig, STAGE_DISCRETE_INPUT)
    fresh = [v for v in removal_sig.state_vars if v not in before]
    params = dict(trace.params)
    for name in sorted(removal_sig.params):
        params.setdefault(name, Fraction(rng.choice((0, 1, 2))))
    trace = DiscreteLassoTrace(trace.states, trace.loop_start, trace.timestamps, params, shift=trace.shift)

    try:
        extended = extend_with_prophecies(trace, removal_sig, [v for v in fresh if v in removal_sig.origins])
    except XltlefError as e:
        raise CaseFailure(phi, trace, f"prophecy values: {e}")
    original = eval_discrete(trace, 0, phi, removal_sig)
    removed = eval_discrete(extended, 0, problem.formula, removal_sig)
    if original != removed:
        raise CaseFailure(phi, trace, f"input {original}, after removal {removed}")
    if problem.constraints and not eval_discrete(extended, 0, L.conj(problem.constraints), removal_sig):
        raise CaseFailure(phi, trace, "prophecy values violate their constraints")


def _dense_formula(rng: random.Random, config: RunConfig, model: TimeModel, trace) -> Node:
    sig = suite_signature()
    phi = FormulaGenerator(rng, "dense", min(config.max_depth, 3), model).formula()
    try:
        to_core(phi, model, sig.copy())
    except EncodingError:
        raise Skip()
    if trace is not None and not eval_dense(trace, 0, phi, sig):
        phi = L.not_(phi)
    return phi


def _discretize_case(rng: random.Random, config: RunConfig) -> None:
    model = rng.choice((TimeModel.DENSE, TimeModel.SUPER_DENSE))
    trace = random_interval_trace(rng, model)
    phi = _dense_formula(rng, config, model, trace)
    sig = suite_signature()
    core = to_core(phi, model, sig)
    problem = discretize(core, model, sig)
    sampled = sample_trace(trace, core, problem)
    if not eval_discrete(sampled, 0, problem.formula, sig):
        raise CaseFailure(phi, None, f"sampled {model.value} trace violates the discretized formula")


def _solver_available(config: RunConfig) -> bool:
    argv = config.solver_argv()
    return bool(argv) and shutil.which(argv[0]) is not None


def _reconstruct_case(rng: random.Random, config: RunConfig) -> None:
    from backend.check import SATISFIABLE, check

    model = rng.choice((TimeModel.DENSE, TimeModel.SUPER_DENSE))
    phi = _dense_formula(rng, config, model, None)
    problem = ProblemFile(model, suite_signature(), phi, "sat", source="suite")
    bmc = replace(config, mode="bmc", bmc_sat_k_max=min(config.bmc_sat_k_max, 8), time_model=None)
    try:
        verdict = check(problem, bmc)
    except WitnessError as e:
        raise CaseFailure(phi, None, str(e))
    if verdict.kind != SATISFIABLE:
        raise Skip()


def _coherence_case(rng: random.Random, config: RunConfig) -> None:
    family = rng.choice(("propositional", "ef", "mtl"))
    sig = suite_signature()
    phi = FormulaGenerator(rng, family, min(config.max_depth, 4), TimeModel.DISCRETE).formula()
    trace = random_discrete_trace(rng, timed=family == "mtl")
    try:
        dense = eval_dense(unit_point_trace(trace), 0, phi, sig)
    except EncodingError:
        raise Skip()
    discrete = eval_discrete(trace, 0, phi, sig)
    if dense != discrete:
        def fails(t, f) -> bool:
            return eval_dense(unit_point_trace(t), 0, f, sig) != eval_discrete(t, 0, f, sig)

        raise CaseFailure(phi, trace, f"eval_dense {dense}, eval_discrete {discrete}", fails)


def _agreement_case(rng: random.Random, config: RunConfig) -> None:
    from backend.check import SATISFIABLE, check

    sig = suite_signature()
    phi = FormulaGenerator(rng, "propositional", 3).formula()
    if L.node_count(phi) > 8:
        raise Skip()
    bounds = TraceBounds(max_prefix=3, max_loop=3)
    brute = brute_force_sat(phi, sig, bounds=bounds)
    problem = ProblemFile(TimeModel.DISCRETE, sig, phi, "sat", source="suite")
    verdict = check(problem, replace(config, mode="bmc", bmc_sat_k_max=12, time_model=None))
    found = verdict.kind == SATISFIABLE
    if brute.sat and not found:
        raise CaseFailure(phi, brute.witness, "brute force found a model, BMC did not")
    if found and not brute.sat:
        w = verdict.witness
        if w.loop_start <= bounds.max_prefix and w.loop_length <= bounds.max_loop:
            raise CaseFailure(phi, w, "BMC model within the brute-force bounds was missed by enumeration")


def _roundtrip_case(rng: random.Random, config: RunConfig) -> None:
    family = rng.choice(("propositional", "ef", "mtl", "ectl", "tlc"))
    phi = FormulaGenerator(rng, family, config.max_depth).formula()
    text = pretty(phi)
    parsed = parse_formula(text, suite_signature())
    if parsed is not phi:
        raise CaseFailure(phi, None, f"'{text}' parses back as '{pretty(parsed)}'")


_CASES: Dict[str, Callable[[random.Random, RunConfig], None]] = {
    "metric": _metric_case,
    "removal": _removal_case,
    "discretize": _discretize_case,
    "reconstruct": _reconstruct_case,
    "coherence": _coherence_case,
    "agreement": _agreement_case,
    "roundtrip": _roundtrip_case,
}


# ============================================================================
# RUNNER
# ============================================================================

def _run_case(suite: str, seed: int, index: int, config: RunConfig) -> Optional[Failure]:
    """None when the case passed; raises Skip when it does not apply."""
    rng = random.Random(f"{seed}:{suite}:{index}")
    try:
        _CASES[suite](rng, config)
    except CaseFailure as failure:
        formula, trace = failure.formula, failure.trace
        if failure.fails is not None and trace is not None:
            trace, formula = shrink(trace, formula, failure.fails)
        return Failure(suite, index, pretty(formula), trace.to_dict() if trace is not None else None,
                       failure.message)
    except XltlefError as e:
        return Failure(suite, index, "", None, f"{type(e).__name__}: {e}")
    return None


def run_suite(suite: str, seed: int, n_cases: int, config: RunConfig) -> SuiteResult:
    if suite not in _CASES:
        raise ValueError(f"Unknown suite '{suite}' (expected one of {', '.join(SUITES)})")
    result = SuiteResult(suite)
    if suite in SOLVER_SUITES and n_cases and not _solver_available(config):
        result.skipped = n_cases
        result.note = "no solver"
        logging.warning(f"Suite {suite} skipped: solver '{config.solver_command}' not found")
        return result

    def one(index: int):
        try:
            return _run_case(suite, seed, index, config)
        except Skip:
            return Skip

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers, thread_name_prefix=f"suite-{suite}") as pool:
            outcomes = list(pool.map(one, range(n_cases)))
    else:
        outcomes = [one(i) for i in range(n_cases)]

    for outcome in outcomes:
        if outcome is Skip:
            result.skipped += 1
        elif outcome is None:
            result.passed += 1
        else:
            result.failed += 1
            result.failures.append(outcome)
    logging.info(f"Suite {suite}: {result.passed} passed, {result.failed} failed, {result.skipped} skipped")
    return result


def run_property_suite(seed: Optional[int] = None, n_cases: Optional[int] = None,
                       suites: Optional[Sequence[str]] = None,
                       config: Optional[RunConfig] = None) -> SuiteReport:
    """Run the named suites (all by default) with n_cases cases each."""
    config = config or get_settings()
    seed = config.seed if seed is None else seed
    n_cases = config.cases if n_cases is None else n_cases
    names = list(suites) if suites else list(SUITES)
    results = [run_suite(name, seed, n_cases, config) for name in names]
    report = SuiteReport(seed, n_cases, results)
    logging.info(f"Property suite seed {seed}: {'ok' if report.ok else 'FAILED'}")
    return report

