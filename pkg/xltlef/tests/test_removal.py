"""Tests for event-freezing removal and the pipeline that feeds it"""

import os
import sys
from fractions import Fraction

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


class TestRemoveEf:
    """Prophecy variables replace event-freezing terms"""

    def test_bindings_and_result(self, sig):
        from core import logic as L
        from core.discretize import STAGE_DISCRETE_INPUT
        from core.removal import remove_ef

        x, y, b = L.var("x", L.REAL), L.var("y", L.REAL), L.var("b")
        term = L.at_next_ns(x, b)
        problem = remove_ef(L.pred("=", term, y), sig, STAGE_DISCRETE_INPUT)
        assert len(problem.bindings) == 1
        binding = problem.bindings[0]
        assert binding.ef_term is term
        assert binding.direction == "future"
        assert binding.var in sig.state_vars
        assert binding.default == sig.default_for(term)
        assert not L.contains_kind(problem.formula, L.EF_KINDS | {L.Kind.PREV})
        assert len(problem.constraints) == 1

    def test_nested_terms_removed_innermost_first(self, sig):
        from core import logic as L
        from core.discretize import STAGE_DISCRETE_INPUT
        from core.removal import order_ef_terms, remove_ef

        x, b, c = L.var("x", L.REAL), L.var("b"), L.var("c")
        inner = L.at_last_ns(x, c)
        outer = L.at_next_ns(inner, b)
        phi = L.pred("<", outer, L.num(1))
        assert order_ef_terms(phi) == [inner, outer]
        problem = remove_ef(phi, sig, STAGE_DISCRETE_INPUT)
        assert [b.direction for b in problem.bindings] == ["past", "future"]

    def test_strict_terms_normalized_at_discrete_input(self, sig):
        from core import logic as L
        from core.discretize import STAGE_DISCRETE_INPUT
        from core.removal import remove_ef

        x, y, b = L.var("x", L.REAL), L.var("y", L.REAL), L.var("b")
        phi = L.and_(L.until_s(b, L.var("c")), L.pred("=", L.at_last(x, b), y))
        problem = remove_ef(phi, sig, STAGE_DISCRETE_INPUT)
        assert not L.contains_kind(problem.formula, {L.Kind.UNTIL_S, L.Kind.SINCE_S, L.Kind.PREV})
        assert len(problem.bindings) == 1

    def test_strict_operators_rejected_after_discretization(self, sig):
        from core import logic as L
        from core.discretize import STAGE_DISCRETE
        from core.errors import StageError
        from core.removal import remove_ef

        with pytest.raises(StageError):
            remove_ef(L.until_s(L.var("b"), L.var("c")), sig, STAGE_DISCRETE)

    def test_unknown_stage(self, sig):
        from core import logic as L
        from core.errors import StageError
        from core.removal import remove_ef

        with pytest.raises(StageError):
            remove_ef(L.var("b"), sig, "core")

    def test_removal_preserves_truth(self, sig):
        from core import logic as L
        from core.discretize import STAGE_DISCRETE_INPUT
        from core.removal import remove_ef
        from oracle.evaluator import eval_discrete
        from oracle.suite import extend_with_prophecies
        from oracle.traces import DiscreteLassoTrace

        x, y, b = L.var("x", L.REAL), L.var("y", L.REAL), L.var("b")
        phi = L.unary(L.Kind.G, L.implies(b, L.pred("<", y, L.at_next_ns(x, L.not_(b)))))
        problem = remove_ef(phi, sig, STAGE_DISCRETE_INPUT)
        trace = DiscreteLassoTrace([
            {"b": True, "x": Fraction(0), "y": Fraction(0)},
            {"b": False, "x": Fraction(3), "y": Fraction(1)},
        ], loop_start=0, params={name: Fraction(0) for name in sig.params})
        extended = extend_with_prophecies(trace, sig, [problem.bindings[0].var])
        assert eval_discrete(trace, 0, phi, sig)
        assert eval_discrete(extended, 0, problem.formula, sig)


class TestPipeline:
    """run_pipeline chains every stage on a copy of the signature"""

    def test_validity_negates(self, problems_dir):
        from core import logic as L
        from core.parser import parse_file
        from core.pipeline import run_pipeline

        problem = parse_file(problems_dir / "bench_02.xef")
        run = run_pipeline(problem)
        assert run.negated
        assert run.target is L.not_(problem.formula)
        assert run.signature is not problem.signature
        assert set(problem.signature.state_vars) < set(run.signature.state_vars)
        assert not L.contains_kind(run.ltlnext.formula, L.EF_KINDS | {L.Kind.PREV})

    def test_satisfiability_keeps_formula(self, problems_dir):
        from core.logic import TimeModel
        from core.parser import parse_file
        from core.pipeline import run_pipeline

        problem = parse_file(problems_dir / "ef_default.xef")
        run = run_pipeline(problem)
        assert not run.negated
        assert run.model is TimeModel.DISCRETE
        assert run.target is problem.formula
        assert len(run.ltlnext.bindings) == 1

    def test_time_model_override(self, problems_dir):
        from core.logic import TimeModel
        from core.parser import parse_file
        from core.pipeline import run_pipeline

        problem = parse_file(problems_dir / "bench_08.xef")
        run = run_pipeline(problem, TimeModel.DISCRETE)
        assert run.model is TimeModel.DISCRETE
        assert run.discretized.sampling.iota is None
