"""Tests for expansion to the core fragment and the metric encodings"""

import os
import sys
from fractions import Fraction

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


def _trace(timed: bool = False):
    from oracle.traces import DiscreteLassoTrace

    states = [
        {"b": False, "c": True, "x": Fraction(1), "y": Fraction(0)},
        {"b": True, "c": False, "x": Fraction(2), "y": Fraction(2)},
        {"b": False, "c": False, "x": Fraction(0), "y": Fraction(1)},
        {"b": True, "c": True, "x": Fraction(2), "y": Fraction(2)},
    ]
    timestamps = [0, 1, 1, 3] if timed else None
    return DiscreteLassoTrace(states, loop_start=1, timestamps=timestamps, params={"p": Fraction(2)})


def _positions(trace):
    return range(len(trace) + trace.loop_length)


class TestExpand:
    """expand rewrites every derived operator into the core fragment"""

    FORMULAS = [
        "G (b -> F c)",
        "b U c",
        "b S c",
        "(b | c) -> X~ b",
        "Y c <-> Z~ b",
        "H~ b | P~ c",
        "b U_C c",
        "x@F(b) = y",
        "x@P(c) < x",
        "x@F~^2(b) >= y",
    ]

    def test_only_core_kinds_remain(self, sig):
        from core import logic as L
        from core.desugar import expand
        from core.logic import Kind
        from core.parser import parse_formula

        allowed = L.CORE_FORMULA_KINDS | {
            Kind.NUM, Kind.VAR, Kind.PARAM, Kind.TIME, Kind.APPLY, Kind.ITE, Kind.AT_NEXT, Kind.AT_LAST,
        }
        for text in self.FORMULAS:
            core = expand(parse_formula(text, sig), sig)
            kinds = {n.kind for n in L.iter_dag(core)}
            assert kinds <= allowed, text

    def test_idempotent(self, sig):
        from core.desugar import expand
        from core.parser import parse_formula

        for text in self.FORMULAS:
            core = expand(parse_formula(text, sig), sig)
            assert expand(core, sig) is core, text

    def test_preserves_meaning(self, sig):
        from core.desugar import expand
        from core.parser import parse_formula
        from oracle.evaluator import eval_discrete

        trace = _trace()
        for text in self.FORMULAS:
            phi = parse_formula(text, sig)
            core = expand(phi, sig)
            for i in _positions(trace):
                assert eval_discrete(trace, i, phi, sig) == eval_discrete(trace, i, core, sig), (text, i)

    def test_rebuilt_term_keeps_default(self, sig):
        from core import logic as L
        from core.desugar import expand
        from core.logic import Kind

        x, y, b, c = L.var("x", L.REAL), L.var("y", L.REAL), L.var("b"), L.var("c")
        sugared = L.at_next_ns(x, L.or_(b, c))
        core = expand(L.pred("=", sugared, y), sig)
        rebuilt = [n for n in L.iter_dag(core) if n.kind is Kind.AT_NEXT]
        assert len(rebuilt) == 1
        assert sig.default_for(rebuilt[0]) == sig.default_for(sugared)

    def test_metric_must_be_encoded_first(self, sig):
        from core.desugar import expand
        from core.errors import StageError
        from core.parser import parse_formula

        with pytest.raises(StageError):
            expand(parse_formula("F[<=2] b", sig), sig)


class TestEncodeMetric:
    """Metric, event-clock and counting operators over time"""

    DISCRETE = [
        "F[<=2] b",
        "G[<3] c",
        "F~[<=p] b",
        "P[<=1] b",
        "F[>=2] c",
        "b U[<=2] c",
        "|>[<=2] b",
        "<|[=p] c",
        "Cf[2][<4] b",
    ]

    def test_agrees_with_direct_semantics(self, sig):
        from core.desugar import to_core
        from core.logic import TimeModel
        from core.parser import parse_formula
        from oracle.evaluator import eval_discrete

        trace = _trace(timed=True)
        for text in self.DISCRETE:
            phi = parse_formula(text, sig)
            core = to_core(phi, TimeModel.DISCRETE, sig)
            for i in _positions(trace):
                assert eval_discrete(trace, i, phi, sig) == eval_discrete(trace, i, core, sig), (text, i)

    def test_no_metric_operators_left(self, sig):
        from core import logic as L
        from core.desugar import encode_metric
        from core.logic import TimeModel
        from core.parser import parse_formula

        for text in self.DISCRETE:
            encoded = encode_metric(parse_formula(text, sig), TimeModel.DISCRETE, sig)
            assert not L.contains_kind(encoded, L.METRIC_KINDS), text
            assert L.free_symbols(encoded).uses_time, text

    def test_non_metric_formula_unchanged(self, sig):
        from core.desugar import encode_metric
        from core.parser import parse_formula

        phi = parse_formula("G (b -> F c)", sig)
        assert encode_metric(phi) is phi

    def test_bounded_interval_away_from_zero(self, sig):
        from core.desugar import encode_metric
        from core.errors import EncodingError
        from core.parser import parse_formula

        with pytest.raises(EncodingError):
            encode_metric(parse_formula("F[[1, 2]] b", sig))

    def test_lower_bounded_until_needs_discrete_time(self, sig):
        from core.desugar import encode_metric
        from core.errors import EncodingError
        from core.logic import TimeModel
        from core.parser import parse_formula

        phi = parse_formula("b U[>=1] c", sig)
        with pytest.raises(EncodingError):
            encode_metric(phi, TimeModel.DENSE)
        encode_metric(phi, TimeModel.DISCRETE)
