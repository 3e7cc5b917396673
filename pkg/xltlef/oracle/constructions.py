"""Constructions - moving models between dense and discrete time

sample_trace turns an interval lasso into a discrete lasso over the
sampling variables (one sample per singular point, one at the midpoint of
every open interval). reconstruct_dense goes the other way: samples with
iota become singular intervals, the others become the open interval
between their neighbours.

INVARIANTS:
1. Open intervals are refined first, so every atom of the formula keeps
   one truth value on each of them
2. zeta never resets in the prefix and resets exactly once per discrete loop
3. The reconstructed trace starts its loop at a singular interval
"""

import logging
import math
from fractions import Fraction
from typing import Dict, List, Tuple

from core import logic as L
from core.discretize import DiscretizedProblem, SamplingVars
from core.errors import TraceError
from core.logic import Kind, Node, TimeModel
from oracle.evaluator import DenseEvaluator, Refinement
from oracle.traces import DiscreteLassoTrace, IntervalEntry, IntervalTrace, Value

Sample = Tuple[bool, Fraction, Dict[str, Value]]


def _refine(evaluator: DenseEvaluator, atoms: List[Node], end_entry: int) -> None:
    """Split open segments until every atom is decided on all segments before end_entry."""
    q = 0
    while evaluator.segment(q).entry < end_entry:
        try:
            for atom in atoms:
                evaluator.formula(atom, q)
        except Refinement as r:
            evaluator.split(r.index, r.at)
            q = min(q, r.index)
            continue
        q += 1


def _samples(evaluator: DenseEvaluator, first_entry: int, end_entry: int) -> List[Sample]:
    result: List[Sample] = []
    q = 0
    while evaluator.segment(q).entry < end_entry:
        s = evaluator.segment(q)
        if s.entry >= first_entry:
            t = s.lo if s.point else (s.lo + s.hi) / 2
            result.append((s.point, t, s.state))
        q += 1
    return result


def sample_trace(trace: IntervalTrace, core: Node, problem: DiscretizedProblem) -> DiscreteLassoTrace:
    """A discrete lasso satisfying the discretized problem whenever trace satisfies core."""
    sampling = problem.sampling
    if sampling.iota is None:
        raise TraceError("sampling needs a dense or super-dense problem")
    evaluator = DenseEvaluator(trace, problem.signature)
    evaluator.prepare(core)

    width = trace.loop_length
    rounds = max(0, math.ceil((evaluator.horizon - trace.loop_start) / width))
    cut = trace.loop_start + rounds * width
    atoms = [n for n in L.subformulas(core) if n.kind is Kind.PRED]
    _refine(evaluator, atoms, cut + 2 * width)

    prefix = _samples(evaluator, 0, cut)
    loop = _samples(evaluator, cut, cut + width)
    shift = trace.shift

    def gap(samples: List[Sample], j: int, loop_shift: Fraction) -> Fraction:
        if j + 1 < len(samples):
            return samples[j + 1][1] - samples[j][1]
        return samples[0][1] + loop_shift - samples[j][1]

    loop_gaps = [gap(loop, j, shift) for j in range(len(loop))]
    copies = math.ceil((1 + max(loop_gaps)) / shift) + 1

    # prefix, then `copies` loop iterations with zeta accumulating, then the
    # discrete loop of another `copies` iterations
    block = [(p, t + k * shift, st) for k in range(copies) for (p, t, st) in loop]
    unrolled = prefix + block + [(p, t + copies * shift, st) for (p, t, st) in block]
    loop_start = len(prefix) + len(block)
    period = copies * shift

    states: List[Dict[str, Value]] = []
    timestamps: List[Fraction] = []
    zeta = Fraction(0)
    for j, (point, t, state) in enumerate(unrolled):
        if j + 1 < len(unrolled):
            delta = unrolled[j + 1][1] - t
        else:
            delta = unrolled[loop_start][1] + period - t
        row = dict(state)
        row[sampling.iota] = point
        row[sampling.delta] = delta
        if j == loop_start:
            zeta = Fraction(0)
        row[sampling.zeta] = zeta
        states.append(row)
        timestamps.append(t)
        zeta += delta

    logging.debug(f"sample_trace: {len(prefix)} prefix samples, {len(block)} loop samples x2 "
                  f"({copies} iterations each)")
    return DiscreteLassoTrace(states, loop_start, timestamps, dict(trace.params),
                              dict(trace.functions), shift=period)


def reconstruct_dense(trace: DiscreteLassoTrace, sampling: SamplingVars,
                      model: TimeModel = TimeModel.DENSE) -> IntervalTrace:
    """Interval lasso whose singular and open intervals are the samples of trace."""
    if sampling.iota is None:
        raise TraceError("reconstruction needs a dense or super-dense sampling")
    hidden = {sampling.iota, sampling.delta, sampling.zeta}

    def is_point(i: int) -> bool:
        return bool(trace.value(i, sampling.iota))

    def state(i: int) -> Dict[str, Value]:
        return {k: v for k, v in trace.states[trace.index(i)].items() if k not in hidden}

    start = trace.loop_start if is_point(trace.loop_start) else trace.loop_start + 1
    if not is_point(start):
        raise TraceError("two open samples in a row")
    entries: List[IntervalEntry] = []
    for i in range(start + trace.loop_length):
        if is_point(i):
            entries.append(IntervalEntry.point(trace.time(i), state(i)))
        elif i == 0:
            raise TraceError("the first sample must be singular")
        else:
            entries.append(IntervalEntry.open(trace.time(i - 1), trace.time(i + 1), state(i)))
    return IntervalTrace(entries, start, trace.shift, dict(trace.params), dict(trace.functions), model)
