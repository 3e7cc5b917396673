"""Tests for traces and the reference evaluator"""

import json
import os
import sys
from fractions import Fraction

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


def _points():
    from oracle.traces import IntervalEntry, IntervalTrace

    return IntervalTrace([
        IntervalEntry.point(0, {"b": False, "x": Fraction(0)}),
        IntervalEntry.open(0, 1, {"b": False, "x": Fraction(1)}),
        IntervalEntry.point(1, {"b": True, "x": Fraction(2)}),
        IntervalEntry.open(1, 2, {"b": False, "x": Fraction(3)}),
    ], loop_start=2, shift=1)


class TestDiscreteLassoTrace:
    """Validation, unrolled positions and the JSON form"""

    def test_default_timestamps_and_shift(self):
        from oracle.traces import DiscreteLassoTrace

        trace = DiscreteLassoTrace([{}, {}, {}], loop_start=1)
        assert trace.timestamps == [0, 1, 2]
        assert trace.shift == 2
        assert trace.index(5) == 1
        assert trace.time(3) == 3

    def test_missing_values_read_zero(self):
        from oracle.traces import DiscreteLassoTrace

        trace = DiscreteLassoTrace([{"x": Fraction(4)}])
        assert trace.value(0, "y") == 0

    @pytest.mark.parametrize("kwargs", [
        {"states": []},
        {"states": [{}], "loop_start": 1},
        {"states": [{}, {}], "timestamps": [1, 2]},
        {"states": [{}, {}], "timestamps": [0, 2, 3]},
        {"states": [{}, {}], "timestamps": [0, 0], "shift": 0},
        {"states": [{}, {}, {}], "timestamps": [0, 2, 1]},
        {"states": [{}, {}], "loop_start": 0, "timestamps": [0, 3], "shift": 1},
    ])
    def test_invalid_traces(self, kwargs):
        from core.errors import TraceError
        from oracle.traces import DiscreteLassoTrace

        with pytest.raises(TraceError):
            DiscreteLassoTrace(**kwargs)

    def test_zeno_loop_allowed_on_request(self):
        from oracle.traces import DiscreteLassoTrace

        trace = DiscreteLassoTrace([{}, {}], timestamps=[0, 0], shift=0, allow_zeno=True)
        assert trace.time(4) == 0

    def test_dict_form(self):
        from oracle.traces import DiscreteLassoTrace, trace_from_dict

        trace = DiscreteLassoTrace([{"b": True, "x": Fraction(1, 3)}, {"b": False}], loop_start=1,
                                   timestamps=[0, Fraction(1, 2)], params={"p": Fraction(2)})
        data = trace.to_dict()
        assert data["states"][0]["x"] == "1/3"
        assert data["kind"] == "discrete"
        again = trace_from_dict(json.loads(json.dumps(data)))
        assert again.states == trace.states
        assert again.timestamps == trace.timestamps
        assert again.shift == trace.shift

    def test_newer_schema_rejected(self):
        from core.errors import TraceError
        from oracle.traces import trace_from_dict

        with pytest.raises(TraceError):
            trace_from_dict({"format": "xltlef-trace", "schema_version": 99, "states": [{}]})

    def test_load_problem_trace(self, problems_dir):
        from oracle.traces import DiscreteLassoTrace, load_trace

        trace = load_trace(problems_dir / "ef_default_trace.json")
        assert isinstance(trace, DiscreteLassoTrace)
        assert trace.params["def_1"] == 5

    def test_load_wrapped_trace(self, tmp_path):
        from oracle.traces import DiscreteLassoTrace, dump_trace, load_trace

        trace = DiscreteLassoTrace([{"b": True}])
        path = tmp_path / "plain.json"
        dump_trace(trace, path)
        wrapped = tmp_path / "wrapped.json"
        wrapped.write_text(json.dumps({"verdict": "sat", "trace": json.loads(path.read_text())}))
        assert load_trace(wrapped).states == [{"b": True}]

    def test_unreadable_file(self, tmp_path):
        from core.errors import TraceError
        from oracle.traces import load_trace

        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        with pytest.raises(TraceError):
            load_trace(bad)


class TestIntervalTrace:
    """Adjacency rules for singular and open intervals"""

    def test_locate(self):
        trace = _points()
        assert trace.locate(0) == 0
        assert trace.locate(Fraction(1, 2)) == 1
        assert trace.locate(Fraction(5, 2)) == 5

    def test_dense_rejects_consecutive_points(self):
        from core.errors import TraceError
        from core.logic import TimeModel
        from oracle.traces import IntervalEntry, IntervalTrace

        entries = [IntervalEntry.point(0), IntervalEntry.point(0), IntervalEntry.open(0, 1)]
        with pytest.raises(TraceError):
            IntervalTrace(entries, 0, 1)
        IntervalTrace(entries + [IntervalEntry.point(1), IntervalEntry.open(1, 2)], 3, 1,
                      time_model=TimeModel.SUPER_DENSE)

    def test_must_start_at_zero(self):
        from core.errors import TraceError
        from oracle.traces import IntervalEntry, IntervalTrace

        with pytest.raises(TraceError):
            IntervalTrace([IntervalEntry.point(1), IntervalEntry.open(1, 2)], 0, 1)

    def test_gap_rejected(self):
        from core.errors import TraceError
        from oracle.traces import IntervalEntry, IntervalTrace

        with pytest.raises(TraceError):
            IntervalTrace([IntervalEntry.point(0), IntervalEntry.open(0, 1), IntervalEntry.point(2),
                           IntervalEntry.open(2, 3)], 2, 1)


class TestEvalDiscrete:
    """Direct semantics on discrete lassos"""

    def test_future_and_past(self, sig):
        from core.parser import parse_formula
        from oracle.evaluator import eval_discrete
        from oracle.traces import DiscreteLassoTrace

        trace = DiscreteLassoTrace([{"b": False}, {"b": True}, {"b": False}], loop_start=1)
        assert eval_discrete(trace, 0, parse_formula("G F b", sig), sig)
        assert not eval_discrete(trace, 0, parse_formula("F G b", sig), sig)
        assert eval_discrete(trace, 2, parse_formula("Y b", sig), sig)
        assert not eval_discrete(trace, 0, parse_formula("Y true", sig), sig)
        assert eval_discrete(trace, 0, parse_formula("Z false", sig), sig)

    def test_event_freezing_values(self, sig):
        from core import logic as L
        from oracle.evaluator import eval_term
        from oracle.traces import DiscreteLassoTrace

        x, b = L.var("x", L.REAL), L.var("b")
        trace = DiscreteLassoTrace([{"b": True, "x": Fraction(1)}, {"b": False, "x": Fraction(2)},
                                    {"b": True, "x": Fraction(3)}], loop_start=1)
        assert eval_term(trace, 0, L.at_next_ns(x, b), sig) == 1
        assert eval_term(trace, 0, L.at_next(x, b), sig) == 3
        assert eval_term(trace, 3, L.at_last(x, b), sig) == 3
        assert eval_term(trace, 0, L.at_iter(L.Kind.AT_NEXT_ITER, x, b, 2), sig) == 3

    def test_missing_event_reads_default(self, sig):
        from core import logic as L
        from oracle.evaluator import eval_term
        from oracle.traces import DiscreteLassoTrace

        x = L.var("x", L.REAL)
        term = L.at_next_ns(x, L.false())
        name = sig.default_for(term)
        with_default = DiscreteLassoTrace([{"x": Fraction(1)}], params={name: Fraction(7)})
        assert eval_term(with_default, 0, term, sig) == 7
        assert eval_term(DiscreteLassoTrace([{"x": Fraction(1)}]), 0, term, sig) == 0

    def test_problem_file_with_trace(self, problems_dir):
        from core.parser import parse_file
        from oracle.evaluator import eval_discrete
        from oracle.traces import load_trace

        problem = parse_file(problems_dir / "ef_default.xef")
        trace = load_trace(problems_dir / "ef_default_trace.json")
        assert eval_discrete(trace, 0, problem.formula, problem.signature)

    def test_metric_on_timestamps(self, sig):
        from core.parser import parse_formula
        from oracle.evaluator import eval_discrete
        from oracle.traces import DiscreteLassoTrace

        trace = DiscreteLassoTrace([{"b": False}, {"b": False}, {"b": True}], loop_start=2,
                                   timestamps=[0, 1, 3])
        assert eval_discrete(trace, 0, parse_formula("F[<=3] b", sig), sig)
        assert not eval_discrete(trace, 0, parse_formula("F[<3] b", sig), sig)
        assert eval_discrete(trace, 0, parse_formula("|>[=3] b", sig), sig)
        assert eval_discrete(trace, 0, parse_formula("Cf[2][<5] b", sig), sig)

    def test_negative_position(self, sig):
        from core import logic as L
        from core.errors import TraceError
        from oracle.evaluator import eval_discrete
        from oracle.traces import DiscreteLassoTrace

        with pytest.raises(TraceError):
            eval_discrete(DiscreteLassoTrace([{}]), -1, L.true(), sig)


class TestEvalDense:
    """Dense semantics on interval lassos"""

    def test_points_and_intervals(self, sig):
        from core.parser import parse_formula
        from oracle.evaluator import eval_dense

        trace = _points()
        assert eval_dense(trace, 1, parse_formula("b", sig), sig)
        assert not eval_dense(trace, Fraction(1, 2), parse_formula("b", sig), sig)
        assert eval_dense(trace, 0, parse_formula("G F b", sig), sig)
        assert eval_dense(trace, 0, parse_formula("F[<=1] b", sig), sig)
        assert not eval_dense(trace, 0, parse_formula("F[<1] b", sig), sig)

    def test_strict_until_in_open_interval(self, sig):
        from core.parser import parse_formula
        from oracle.evaluator import eval_dense

        trace = _points()
        # inside (0, 1) the next b is at time 1 and !b holds up to it
        assert eval_dense(trace, Fraction(1, 2), parse_formula("!b U~ b", sig), sig)
        assert not eval_dense(trace, 0, parse_formula("X~ b", sig), sig)

    def test_event_freezing_term(self, sig):
        from core import logic as L
        from oracle.evaluator import eval_dense_term

        x, b = L.var("x", L.REAL), L.var("b")
        assert eval_dense_term(_points(), 0, L.at_next(x, b), sig) == 2
        assert eval_dense_term(_points(), 0, L.at_next(L.time_(), b), sig) == 1

    def test_agrees_with_discrete_on_points(self, sig):
        from core.parser import parse_formula
        from oracle.evaluator import eval_dense, eval_discrete
        from oracle.generators import unit_point_trace
        from oracle.traces import DiscreteLassoTrace

        trace = DiscreteLassoTrace([{"b": False, "x": Fraction(1)}, {"b": True, "x": Fraction(2)},
                                    {"b": False, "x": Fraction(0)}], loop_start=1, timestamps=[0, 1, 3])
        points = unit_point_trace(trace)
        for text in ("G F b", "b U c", "x@F(b) > 1", "F[<=2] b", "H x <= 2", "Y~ true"):
            phi = parse_formula(text, sig)
            assert eval_dense(points, 0, phi, sig) == eval_discrete(trace, 0, phi, sig), text

    def test_holds_dispatches_on_trace_kind(self, sig):
        from core.parser import parse_formula
        from oracle.evaluator import holds
        from oracle.traces import DiscreteLassoTrace

        phi = parse_formula("F b", sig)
        assert holds(_points(), phi, sig)
        assert holds(DiscreteLassoTrace([{"b": True}]), phi, sig)
