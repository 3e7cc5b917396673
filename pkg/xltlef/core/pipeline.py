"""Pipeline - the translation chain from a parsed problem to LTL with next

    problem --(negate if check valid)--> target
            --encode_metric, expand-->   core
            --discretize-->              discretized
            --remove_ef-->               ltlnext

Every run works on a copy of the problem signature, so fresh symbols of
one run never leak into another and artifacts are reproducible.
"""

import logging
from dataclasses import dataclass
from typing import Optional

from core import logic as L
from core.desugar import encode_metric, expand
from core.discretize import DiscretizedProblem, discretize
from core.logic import Node, Signature, TimeModel
from core.parser import ProblemFile
from core.removal import LtlNextProblem, remove_ef

STAGES = ("core", "discrete", "ltlnext", "fts")


@dataclass
class PipelineResult:
    original: Node
    target: Node                 # formula whose satisfiability is decided
    negated: bool
    model: TimeModel
    signature: Signature         # run-local copy, extended by every stage
    encoded: Node
    core: Node
    discretized: DiscretizedProblem
    ltlnext: LtlNextProblem


def target_formula(problem: ProblemFile) -> Node:
    """The formula to search a model for: the negation when checking validity."""
    return L.not_(problem.formula) if problem.check == "valid" else problem.formula


def run_pipeline(problem: ProblemFile, model: Optional[TimeModel] = None,
                 negate: Optional[bool] = None) -> PipelineResult:
    model = model or problem.time_model
    if negate is None:
        negate = problem.check == "valid"
    target = L.not_(problem.formula) if negate else problem.formula
    sig = problem.signature.copy()

    encoded = encode_metric(target, model, sig)
    core = expand(encoded, sig)
    logging.info(f"Core stage: {L.node_count(core)} nodes ({model.value} time)")
    discretized = discretize(core, model, sig)
    ltlnext = remove_ef(discretized.formula, sig, discretized.stage, discretized.sampling)
    return PipelineResult(problem.formula, target, negate, model, sig, encoded, core,
                          discretized, ltlnext)
