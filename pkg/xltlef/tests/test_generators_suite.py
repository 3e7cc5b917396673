"""Tests for the random generators, shrinking and the property suite runner"""

import os
import random
import sys
from fractions import Fraction
from unittest.mock import patch

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


class TestGenerators:
    """Seeded generation is reproducible and well-formed"""

    def test_same_seed_same_formula(self):
        from oracle.generators import FAMILIES, FormulaGenerator

        for family in FAMILIES:
            one = FormulaGenerator(random.Random(7), family, 4).formula()
            two = FormulaGenerator(random.Random(7), family, 4).formula()
            assert one is two, family

    def test_unknown_family(self):
        from oracle.generators import FormulaGenerator

        with pytest.raises(ValueError):
            FormulaGenerator(random.Random(0), "quantum")

    def test_formulas_parse_back(self, sig):
        from core.parser import parse_formula
        from core.printer import pretty
        from oracle.generators import FormulaGenerator

        rng = random.Random(3)
        for family in ("propositional", "ef", "mtl"):
            gen = FormulaGenerator(rng, family, 4)
            for _ in range(10):
                phi = gen.formula()
                assert parse_formula(pretty(phi), sig) is phi

    def test_random_traces_are_valid(self):
        from core.logic import TimeModel
        from oracle.generators import random_discrete_trace, random_interval_trace

        rng = random.Random(11)
        for _ in range(20):
            trace = random_discrete_trace(rng)
            assert trace.shift > 0
            dense = random_interval_trace(rng, TimeModel.SUPER_DENSE)
            assert dense.entries[0].is_point

    def test_unroll_keeps_the_model(self, sig):
        from core.parser import parse_formula
        from oracle.evaluator import eval_discrete
        from oracle.generators import random_discrete_trace, unroll

        rng = random.Random(5)
        phi = parse_formula("G (b -> F[<=2] c) | F x > y", sig)
        for _ in range(10):
            trace = random_discrete_trace(rng)
            longer = unroll(trace, 2)
            assert len(longer) == len(trace) + 2 * trace.loop_length
            assert eval_discrete(longer, 0, phi, sig) == eval_discrete(trace, 0, phi, sig)

    def test_unit_point_trace(self):
        from core.logic import TimeModel
        from oracle.generators import unit_point_trace
        from oracle.traces import DiscreteLassoTrace

        trace = DiscreteLassoTrace([{"b": True}, {"b": False}], loop_start=1, timestamps=[0, 2])
        points = unit_point_trace(trace)
        assert points.time_model is TimeModel.DISCRETE
        assert [e.lo for e in points.entries] == [0, 2]
        assert all(e.is_point for e in points.entries)


class TestShrink:
    """Greedy shrinking keeps the failure"""

    def test_shrinks_trace_and_formula(self, sig):
        from core import logic as L
        from core.parser import parse_formula
        from oracle.evaluator import eval_discrete
        from oracle.generators import shrink
        from oracle.traces import DiscreteLassoTrace

        def fails(trace, phi):
            return not eval_discrete(trace, 0, phi, sig)

        trace = DiscreteLassoTrace([{"b": False}, {"b": False}, {"b": True}, {"b": False}], loop_start=1)
        phi = parse_formula("G b & (F c | c)", sig)
        assert fails(trace, phi)
        small_trace, small_phi = shrink(trace, phi, fails)
        assert fails(small_trace, small_phi)
        assert len(small_trace) <= len(trace)
        assert L.node_count(small_phi) < L.node_count(phi)

    def test_passing_case_is_left_alone(self, sig):
        from core import logic as L
        from oracle.generators import shrink
        from oracle.traces import DiscreteLassoTrace

        trace = DiscreteLassoTrace([{"b": True}])
        phi = L.var("b")
        assert shrink(trace, phi, lambda t, f: False) == (trace, phi)


class TestPropertySuite:
    """run_suite / run_property_suite bookkeeping"""

    def test_roundtrip_suite_passes(self):
        from core.settings import RunConfig
        from oracle.suite import run_property_suite

        report = run_property_suite(seed=1, n_cases=25, suites=["roundtrip"], config=RunConfig())
        assert report.ok
        assert report.results[0].passed + report.results[0].skipped == 25
        assert "OK" in report.summary()

    def test_metric_suite_reports_every_case(self):
        from core.settings import RunConfig
        from oracle.suite import run_suite

        result = run_suite("metric", 2, 10, RunConfig())
        assert result.passed + result.failed + result.skipped == 10
        data = result.to_dict()
        assert data["name"] == "metric"
        assert len(data["failures"]) == result.failed

    def test_same_seed_same_outcome(self):
        from core.settings import RunConfig
        from oracle.suite import run_suite

        one = run_suite("removal", 9, 8, RunConfig()).to_dict()
        two = run_suite("removal", 9, 8, RunConfig()).to_dict()
        assert one == two

    def test_unknown_suite(self):
        from core.settings import RunConfig
        from oracle.suite import run_suite

        with pytest.raises(ValueError):
            run_suite("nonsense", 0, 1, RunConfig())

    def test_solver_suites_skip_without_solver(self):
        from core.settings import RunConfig
        from oracle.suite import run_property_suite

        with patch("oracle.suite._solver_available", return_value=False):
            report = run_property_suite(seed=0, n_cases=5, suites=["agreement", "reconstruct"],
                                        config=RunConfig())
        assert report.ok
        for result in report.results:
            assert result.skipped == 5
            assert result.note == "no solver"

    def test_report_dict(self):
        from core.settings import RunConfig
        from oracle.suite import run_property_suite

        report = run_property_suite(seed=4, n_cases=3, suites=["roundtrip"], config=RunConfig())
        data = report.to_dict()
        assert data["seed"] == 4
        assert data["cases"] == 3
        assert data["ok"] is report.ok

    def test_prophecy_extension(self, sig):
        from core import logic as L
        from oracle.suite import extend_with_prophecies
        from oracle.traces import DiscreteLassoTrace

        x, b = L.var("x", L.REAL), L.var("b")
        name = sig.fresh_var("p", L.REAL, origin=L.at_next(x, b)).payload
        trace = DiscreteLassoTrace([{"b": True, "x": Fraction(1)}, {"b": False, "x": Fraction(2)}])
        extended = extend_with_prophecies(trace, sig, [name])
        assert extended.states[0][name] == 1
        assert extended.states[1][name] == 1
