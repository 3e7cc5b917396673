"""Check - verdicts for problem files

    problem --pipeline--> LTL with next --build_fts--> FTS --engine--> verdict

check valid decides the negation: a fair path is a counterexample
(NOT VALID), a proof that none exists makes the formula VALID. check sat
decides the formula itself (SAT / UNSAT). Witnesses are mapped back to the
input vocabulary (clocks to absolute values, dense witnesses to interval
lassos) and replayed on the input formula before they are reported.

INVARIANTS:
1. A witness that does not replay raises WitnessError, never a verdict
2. Solver unknowns and exhausted bounds give UNKNOWN, not an exception
3. Exit codes: 0 answer as hoped (valid / sat), 1 the opposite, 2 unknown
"""

import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from backend.engines import SAT, UNSAT, EngineResult, run_engine
from backend.fts import FTS, build_fts
from backend.kinduction import Certificate
from core.errors import TraceError, WitnessError
from core.logic import TimeModel
from core.parser import ProblemFile
from core.pipeline import PipelineResult, run_pipeline
from core.settings import RunConfig, get_settings
from oracle.constructions import reconstruct_dense
from oracle.evaluator import eval_dense, eval_discrete
from oracle.traces import DiscreteLassoTrace, IntervalTrace

VALID = "valid"
NOT_VALID = "not_valid"
SATISFIABLE = "sat"
UNSATISFIABLE = "unsat"
UNKNOWN = "unknown"

_LABELS = {
    VALID: "VALID",
    NOT_VALID: "NOT VALID",
    SATISFIABLE: "SAT",
    UNSATISFIABLE: "UNSAT",
    UNKNOWN: "UNKNOWN",
}

_EXIT_CODES = {VALID: 0, SATISFIABLE: 0, NOT_VALID: 1, UNSATISFIABLE: 1, UNKNOWN: 2}

Witness = Union[DiscreteLassoTrace, IntervalTrace]


@dataclass
class Verdict:
    kind: str
    method: str = ""
    bound: int = 0
    witness: Optional[Witness] = None
    sampled: Optional[DiscreteLassoTrace] = None     # discretized witness for dense time
    certificate: Optional[Certificate] = None
    reason: str = ""
    bounds_tried: List[Tuple[int, int]] = field(default_factory=list)
    elapsed_s: float = 0.0
    witness_path: Optional[str] = None

    @property
    def exit_code(self) -> int:
        return _EXIT_CODES[self.kind]

    @property
    def label(self) -> str:
        return _LABELS[self.kind]

    def describe(self) -> str:
        """One line for the terminal."""
        if self.certificate is not None:
            c = self.certificate
            return f"{self.label} ({self.method}, n={c.counter_bound}, k={c.depth})"
        if self.witness is not None:
            text = f"{self.label} ({self.method}, lasso with {self.bound} states)"
            if self.witness_path:
                text += f"\nwitness: {self.witness_path}"
            return text
        return f"{self.label} ({self.reason})" if self.reason else self.label

    def to_dict(self) -> Dict[str, Any]:
        return {
            "verdict": self.label,
            "kind": self.kind,
            "method": self.method,
            "bound": self.bound,
            "reason": self.reason,
            "bounds_tried": [list(b) for b in self.bounds_tried],
            "certificate": self.certificate.to_dict() if self.certificate else None,
            "witness": self.witness_path,
            "elapsed_s": round(self.elapsed_s, 3),
        }

    def witness_file(self) -> Dict[str, Any]:
        """Witness as a trace file with the verdict attached."""
        if self.witness is None:
            raise WitnessError("verdict has no witness")
        data = self.witness.to_dict()
        data["verdict"] = self.label
        if self.sampled is not None:
            data["sampled"] = self.sampled.to_dict()
        return data


# ============================================================================
# WITNESS BACK-MAPPING
# ============================================================================

def _strip_sampling(trace: DiscreteLassoTrace, fts: FTS) -> DiscreteLassoTrace:
    hidden = {v for v in (fts.sampling.iota, fts.sampling.delta, fts.sampling.zeta) if v}
    states = [{k: v for k, v in s.items() if k not in hidden} for s in trace.states]
    return DiscreteLassoTrace(states, trace.loop_start, trace.timestamps, trace.params,
                              trace.functions, shift=trace.shift)


def back_map(result: EngineResult, fts: FTS, model: TimeModel) -> Tuple[Witness, Optional[DiscreteLassoTrace]]:
    """Witness trace in the input vocabulary, plus the sampled lasso for dense time."""
    sampled = result.lasso.to_trace(fts)
    if model is TimeModel.DISCRETE:
        return _strip_sampling(sampled, fts), None
    try:
        return reconstruct_dense(sampled, fts.sampling, model), sampled
    except TraceError as e:
        raise WitnessError(f"sampled lasso has no dense reconstruction: {e}")


def replay(witness: Witness, run: PipelineResult) -> bool:
    if isinstance(witness, IntervalTrace):
        return eval_dense(witness, 0, run.target, run.signature)
    return eval_discrete(witness, 0, run.target, run.signature)


# ============================================================================
# CHECKS
# ============================================================================

def check(problem: ProblemFile, config: Optional[RunConfig] = None,
          check_kind: Optional[str] = None) -> Verdict:
    """Decide the problem's `check` line (or check_kind) with the configured engine."""
    config = config or get_settings()
    check_kind = check_kind or problem.check
    model = TimeModel.from_name(config.time_model) if config.time_model else problem.time_model
    started = time.monotonic()

    run = run_pipeline(problem, model, negate=check_kind == "valid")
    fts = build_fts(run.ltlnext)
    logging.info(f"Checking {problem.source} ({check_kind}, {model.value} time, engine {config.mode})")
    result = run_engine(config.mode, fts, config)
    verdict = _verdict(result, check_kind, fts, run)
    verdict.elapsed_s = time.monotonic() - started
    logging.info(f"Verdict for {problem.source}: {verdict.label} in {verdict.elapsed_s:.2f}s")
    return verdict


def check_valid(problem: ProblemFile, config: Optional[RunConfig] = None) -> Verdict:
    return check(problem, config, "valid")


def check_sat(problem: ProblemFile, config: Optional[RunConfig] = None) -> Verdict:
    return check(problem, config, "sat")


def _verdict(result: EngineResult, check_kind: str, fts: FTS, run: PipelineResult) -> Verdict:
    validity = check_kind == "valid"
    if result.kind == SAT:
        witness, sampled = back_map(result, fts, run.model)
        if not replay(witness, run):
            raise WitnessError(f"{result.engine} lasso with {result.bound} states does not replay "
                               f"on the {'negated ' if validity else ''}input formula")
        return Verdict(NOT_VALID if validity else SATISFIABLE, result.engine, result.bound,
                       witness=witness, sampled=sampled)
    if result.kind == UNSAT:
        return Verdict(VALID if validity else UNSATISFIABLE, result.engine, result.bound,
                       certificate=result.certificate, bounds_tried=result.bounds_tried)
    return Verdict(UNKNOWN, result.engine, result.bound, reason=result.reason,
                   bounds_tried=result.bounds_tried)


def write_witness(verdict: Verdict, directory: Union[str, Path], stem: str) -> Path:
    """Write the verdict's witness as <directory>/<stem>.witness.json."""
    path = Path(directory) / f"{stem}.witness.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(verdict.witness_file(), indent=2) + "\n", encoding="utf-8")
    verdict.witness_path = str(path)
    logging.info(f"Witness written to {path}")
    return path
