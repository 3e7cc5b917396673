"""Brute Force - exhaustive satisfiability over tiny discrete lassos

Every lasso shape within the trace bounds is tried with every assignment
drawn from the value grids, shortest traces first. The result is either a
witness or the statement that no model exists within the bounds.

INVARIANTS:
1. Enumeration order is deterministic, so the first witness is reproducible
2. The candidate count is computed before enumerating; past the cap the
   search raises BoundOverflowError instead of running
3. Default constants of event-freezing terms are enumerated like parameters
"""

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, List, Optional, Sequence, Tuple

from core import logic as L
from core.errors import BoundOverflowError
from core.logic import Node, Signature, SortKind
from oracle.evaluator import eval_discrete
from oracle.traces import DiscreteLassoTrace, Value


@dataclass(frozen=True)
class DomainBounds:
    """Value grids for state variables and parameters."""
    ints: Tuple[int, ...] = (0, 1, 2)
    reals: Tuple[Fraction, ...] = (Fraction(0), Fraction(1), Fraction(2))
    sort_size: int = 2          # elements of each uninterpreted sort


@dataclass(frozen=True)
class TraceBounds:
    max_prefix: int = 3
    max_loop: int = 3
    max_length: Optional[int] = None
    time_steps: Tuple[Fraction, ...] = (Fraction(0), Fraction(1), Fraction(2))
    max_candidates: int = 2_000_000


@dataclass
class BruteForceResult:
    sat: bool
    witness: Optional[DiscreteLassoTrace]
    candidates: int
    shapes: List[Tuple[int, int]] = field(default_factory=list)   # (length, loop_start) tried

    @property
    def verdict(self) -> str:
        return "sat" if self.sat else "unsat-within-bounds"


def _grid(sort, domains: DomainBounds) -> Sequence[Value]:
    if sort == L.BOOL:
        return (False, True)
    if sort == L.INT:
        return tuple(Fraction(v) for v in domains.ints)
    if sort.kind is SortKind.UNINTERPRETED:
        return tuple(Fraction(v) for v in range(domains.sort_size))
    return tuple(Fraction(v) for v in domains.reals)


def _shapes(bounds: TraceBounds) -> Iterator[Tuple[int, int]]:
    longest = bounds.max_prefix + bounds.max_loop
    if bounds.max_length is not None:
        longest = min(longest, bounds.max_length)
    for n in range(1, longest + 1):
        for loop_start in range(n):
            if loop_start <= bounds.max_prefix and n - loop_start <= bounds.max_loop:
                yield n, loop_start


def _product_size(grids: Sequence[Sequence]) -> int:
    size = 1
    for g in grids:
        size *= len(g)
    return size


def brute_force_sat(phi: Node, sig: Signature, domains: DomainBounds = DomainBounds(),
                    bounds: TraceBounds = TraceBounds()) -> BruteForceResult:
    """First lasso within the bounds on which phi holds at position 0.

    Uninterpreted functions are not enumerated: every application reads the
    default value of its result sort.
    """
    sig = sig.copy()
    symbols = L.free_symbols(phi)
    timed = symbols.uses_time or L.contains_kind(phi, L.METRIC_KINDS)

    for node in L.iter_dag(phi):
        if node.kind in L.EF_KINDS:
            sig.default_for(node)
    defaults = sorted(set(sig.defaults.values()))
    param_names = list(dict.fromkeys(list(symbols.parameters) + defaults))
    var_names = list(symbols.state_vars)
    var_grids = [_grid(sig.state_vars.get(v, L.REAL), domains) for v in var_names]
    param_grids = [_grid(sig.params.get(p, L.REAL), domains) for p in param_names]

    shapes = list(_shapes(bounds))
    total = 0
    for n, loop_start in shapes:
        steps = len(bounds.time_steps) ** n if timed else 1
        total += _product_size(var_grids) ** n * steps * _product_size(param_grids)
    if total > bounds.max_candidates:
        raise BoundOverflowError(f"{total} candidate lassos exceed the cap of {bounds.max_candidates}")
    logging.debug(f"brute force: {len(var_names)} variables, {len(param_names)} parameters, "
                  f"{total} candidates")

    tried = 0
    for n, loop_start in shapes:
        for params in itertools.product(*param_grids):
            param_values = dict(zip(param_names, params))
            for rows in itertools.product(itertools.product(*var_grids), repeat=n):
                states = [dict(zip(var_names, row)) for row in rows]
                for timestamps, shift in _timings(n, loop_start, timed, bounds.time_steps):
                    tried += 1
                    trace = DiscreteLassoTrace(states, loop_start, timestamps, param_values, shift=shift)
                    if eval_discrete(trace, 0, phi, sig):
                        logging.info(f"brute force: model with {n} states after {tried} candidates")
                        return BruteForceResult(True, trace, tried, [(n, loop_start)])
    return BruteForceResult(False, None, tried, shapes)


def _timings(n: int, loop_start: int, timed: bool,
             steps: Tuple[Fraction, ...]) -> Iterator[Tuple[List[Fraction], Fraction]]:
    """Timestamps (first one 0) and a positive loop shift built from the step grid."""
    if not timed:
        yield [Fraction(i) for i in range(n)], Fraction(n - loop_start)
        return
    for increments in itertools.product(steps, repeat=n):
        times = [Fraction(0)]
        for d in increments[:-1]:
            times.append(times[-1] + d)
        shift = times[-1] - times[loop_start] + increments[-1]
        if shift > 0:
            yield times, shift
