"""Tests for discretization of dense and super-dense problems"""

import os
import sys

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


def _core(text, sig, model):
    from core.desugar import to_core
    from core.parser import parse_formula

    return to_core(parse_formula(text, sig), model, sig)


class TestDiscreteTime:
    """Discrete problems pass through, plus a time monitor when needed"""

    def test_untimed_formula_is_unchanged(self, sig):
        from core.discretize import STAGE_DISCRETE_INPUT, discretize
        from core.logic import TimeModel

        core = _core("G (b -> F c)", sig, TimeModel.DISCRETE)
        problem = discretize(core, TimeModel.DISCRETE, sig)
        assert problem.formula is core
        assert problem.stage == STAGE_DISCRETE_INPUT
        assert problem.sampling.iota is None
        assert problem.sampling.delta is None

    def test_timed_formula_gets_monitor(self, sig):
        from core import logic as L
        from core.discretize import discretize
        from core.logic import TimeModel

        core = _core("F[<=2] b", sig, TimeModel.DISCRETE)
        problem = discretize(core, TimeModel.DISCRETE, sig)
        assert problem.sampling.iota is None
        assert problem.sampling.delta.startswith("delta_")
        assert problem.sampling.zeta in sig.state_vars
        assert problem.psi_time is not L.true()
        assert problem.d_formula is core


class TestDenseTime:
    """Sampling variables, the rewrite and the uniformity constraints"""

    def test_sampling_variables_are_fresh(self, sig):
        from core import logic as L
        from core.discretize import STAGE_DISCRETE, discretize
        from core.logic import TimeModel

        sig.declare_var("iota_1", L.BOOL)
        core = _core("G (b -> F c)", sig, TimeModel.DENSE)
        problem = discretize(core, TimeModel.DENSE, sig)
        names = (problem.sampling.iota, problem.sampling.delta, problem.sampling.zeta)
        assert problem.sampling.iota != "iota_1"
        assert problem.sampling.iota.startswith("iota_")
        assert all(name in sig.state_vars for name in names)
        assert problem.stage == STAGE_DISCRETE

    def test_no_strict_operators_left(self, sig):
        from core import logic as L
        from core.discretize import discretize
        from core.logic import Kind, TimeModel

        core = _core("G (b -> x@F(c) > y) & H~ c", sig, TimeModel.SUPER_DENSE)
        problem = discretize(core, TimeModel.SUPER_DENSE, sig)
        strict = {Kind.UNTIL_S, Kind.SINCE_S, Kind.AT_NEXT, Kind.AT_LAST}
        assert not L.contains_kind(problem.formula, strict)

    def test_super_dense_allows_point_steps(self, sig):
        from core.discretize import discretize
        from core.logic import TimeModel

        core = _core("F b", sig, TimeModel.DENSE)
        dense = discretize(core, TimeModel.DENSE, sig.copy())
        super_dense = discretize(core, TimeModel.SUPER_DENSE, sig.copy())
        assert dense.psi_iota is not super_dense.psi_iota

    def test_one_uniformity_constraint_per_time_atom(self, sig):
        from core import logic as L
        from core.desugar import to_core
        from core.discretize import discretize
        from core.logic import Kind, TimeModel

        b = L.var("b")
        phi = L.unary(Kind.F, L.and_(b, L.pred("<=", L.time_(), L.num(2))))
        core = to_core(phi, TimeModel.DENSE, sig)
        problem = discretize(core, TimeModel.DENSE, sig)
        assert len(problem.uniformity) == 1

    def test_sampled_trace_satisfies_discretized_formula(self, sig):
        from core.discretize import discretize
        from core.logic import TimeModel
        from oracle.constructions import sample_trace
        from oracle.evaluator import eval_dense, eval_discrete
        from oracle.traces import IntervalEntry, IntervalTrace

        trace = IntervalTrace([
            IntervalEntry.point(0, {"b": False}),
            IntervalEntry.open(0, 1, {"b": False}),
            IntervalEntry.point(1, {"b": True}),
            IntervalEntry.open(1, 2, {"b": False}),
        ], loop_start=2, shift=1)
        core = _core("G F b", sig, TimeModel.DENSE)
        assert eval_dense(trace, 0, core, sig)
        problem = discretize(core, TimeModel.DENSE, sig)
        sampled = sample_trace(trace, core, problem)
        assert eval_discrete(sampled, 0, problem.formula, sig)


class TestEliminatePrev:
    """prev terms become monitor variables"""

    def test_monitor_replaces_prev(self, sig):
        from core import logic as L
        from core.discretize import eliminate_prev
        from core.logic import Kind

        sig.declare_param("d", L.REAL)
        x, y = L.var("x", L.REAL), L.var("y", L.REAL)
        prev = L.prev_(x, "d")
        result = eliminate_prev(L.pred("=", prev, y), sig)
        assert not L.contains_kind(result, {Kind.PREV})
        monitors = [name for name, origin in sig.origins.items() if origin is prev]
        assert len(monitors) == 1
        assert monitors[0].startswith("m_")

    def test_formula_without_prev_is_unchanged(self, sig):
        from core import logic as L
        from core.discretize import eliminate_prev

        phi = L.pred("<", L.var("x", L.REAL), L.num(1))
        assert eliminate_prev(phi, sig) is phi
