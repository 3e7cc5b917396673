"""Tests for verdicts, the engine registry and solver-backed checks

Classes that start a solver take the solver_config fixture and are skipped
when no SMT solver is installed.
"""

import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


def _fts(text: str, model: str = "discrete", check: str = "sat"):
    from backend.fts import build_fts
    from core.parser import parse
    from core.pipeline import run_pipeline

    problem = parse(f"xltlef 1\ntime_model {model};\nvar b, c : bool;\nvar x : real;\n"
                    f"check {check};\nformula: {text};\n")
    return build_fts(run_pipeline(problem).ltlnext)


class TestVerdict:
    """Labels and exit codes"""

    def test_exit_codes(self):
        from backend.check import NOT_VALID, SATISFIABLE, UNKNOWN, UNSATISFIABLE, VALID, Verdict

        assert Verdict(VALID).exit_code == 0
        assert Verdict(SATISFIABLE).exit_code == 0
        assert Verdict(NOT_VALID).exit_code == 1
        assert Verdict(UNSATISFIABLE).exit_code == 1
        assert Verdict(UNKNOWN).exit_code == 2

    def test_describe(self):
        from backend.check import NOT_VALID, UNKNOWN, VALID, Verdict
        from backend.kinduction import Certificate

        assert Verdict(NOT_VALID).label == "NOT VALID"
        proved = Verdict(VALID, "kliveness", certificate=Certificate(2, 3))
        assert proved.describe() == "VALID (kliveness, n=2, k=3)"
        assert Verdict(UNKNOWN, reason="timeout").describe() == "UNKNOWN (timeout)"
        assert proved.to_dict()["certificate"] == {"n": 2, "k": 3, "lemmas": []}

    def test_witness_file_needs_witness(self):
        from backend.check import UNKNOWN, Verdict
        from core.errors import WitnessError

        with pytest.raises(WitnessError):
            Verdict(UNKNOWN).witness_file()


class TestEngineRegistry:
    """Engines are looked up by name"""

    def test_builtin_engines(self):
        from backend.engines import get_registry

        engines = get_registry().list_all()
        assert set(engines) == {"bmc", "kind", "kliveness", "auto"}
        assert engines["bmc"]["can_refute"] and not engines["bmc"]["can_prove"]
        assert engines["auto"]["can_prove"] and engines["auto"]["can_refute"]

    def test_register_rejects_duplicates_and_non_engines(self):
        from backend.engines import BmcEngine, EngineRegistry

        registry = EngineRegistry()
        registry.register(BmcEngine())
        assert registry.has("bmc")
        with pytest.raises(ValueError):
            registry.register(BmcEngine())
        with pytest.raises(TypeError):
            registry.register(object())

    def test_unknown_engine(self):
        from backend.engines import run_engine
        from core.settings import RunConfig

        with pytest.raises(ValueError):
            run_engine("portfolio", _fts("F b"), RunConfig())

    def test_kliveness_uses_counter_bound(self):
        from backend.engines import KInductionEngine, KLivenessEngine
        from core.settings import RunConfig

        config = RunConfig(n_max=5)
        assert KInductionEngine().counter_bound(config) == 1
        assert KLivenessEngine().counter_bound(config) == 5

    def test_missing_solver_binary(self):
        from backend.solver import SolverSession
        from core.errors import SolverError
        from core.settings import RunConfig

        config = RunConfig(solver_command="no-such-solver-binary -in")
        with pytest.raises(SolverError):
            SolverSession(config, "missing")


class TestSolverSession:
    """Raw scripts and incremental queries"""

    def test_solve_script(self, solver_config):
        from backend.solver import SolverSession, solve

        with SolverSession(solver_config, "script") as session:
            result = solve(session, "(declare-const a Real)\n(assert (> a 1.5))\n(check-sat)\n")
        assert result.status == "sat"
        assert "a" in result.model
        with SolverSession(solver_config, "script") as session:
            result = solve(session, "(declare-const a Int)\n(assert (and (> a 1) (< a 2)))\n(check-sat)\n")
        assert result.status == "unsat"

    def test_push_pop(self, solver_config):
        from backend.solver import SolverSession

        with SolverSession(solver_config, "frames") as session:
            a = session.mgr.Symbol("a")
            session.add_assertion(a)
            session.push()
            session.add_assertion(session.mgr.Not(a))
            assert session.check() is False
            session.pop()
            assert session.check() is True
            assert session.get_py_value(a) is True

    def test_declared_symbol_has_a_value(self, solver_config):
        from pysmt.typing import REAL

        from backend.solver import SolverSession

        with SolverSession(solver_config, "declare") as session:
            r = session.mgr.Symbol("r", REAL)
            session.declare([r])
            assert session.check() is True
            session.get_py_value(r)
            assert session.restarts == 0

    def test_values_of_compound_terms(self, solver_config):
        from fractions import Fraction

        from pysmt.typing import INT, FunctionType

        from backend.solver import SolverSession

        with SolverSession(solver_config, "compound") as session:
            mgr = session.mgr
            a = mgr.Symbol("a")
            n = mgr.Symbol("n", INT)
            f = mgr.Symbol("f", FunctionType(INT, [INT]))
            session.add_assertion(mgr.And(a, mgr.Equals(n, mgr.Int(3)),
                                          mgr.Equals(mgr.Function(f, [mgr.Int(1)]), mgr.Int(7))))
            assert session.check() is True
            values = session.get_py_values([mgr.Not(a), mgr.Plus(n, mgr.Int(1)), mgr.Function(f, [mgr.Int(1)]), a])
            assert values == [False, Fraction(4), Fraction(7), True]
            assert session.check() is True
            assert session.restarts == 0

    def test_unreadable_reply_fails_the_session(self, solver_config):
        from backend.solver import SolverSession
        from core.errors import SolverError

        with SolverSession(solver_config, "undeclared") as session:
            ghost = session.mgr.Symbol("ghost")
            assert session.check() is True
            with pytest.raises(SolverError):
                session.get_value(ghost)
            assert session.restarts == 0
            with pytest.raises(SolverError):
                session.check()

    def test_scope_pops_on_error(self, solver_config):
        from backend.solver import SolverSession

        with SolverSession(solver_config, "scope") as session:
            with pytest.raises(RuntimeError):
                with session.scope():
                    assert session.level == 1
                    raise RuntimeError("leave the block")
            assert session.level == 0


class TestEngines:
    """Lasso search and k-liveness on small systems"""

    def test_bmc_finds_lasso(self, solver_config):
        from backend.bmc import check_sat_bmc
        from backend.solver import SolverSession

        fts = _fts("G F b & G F !b")
        with SolverSession(solver_config, "bmc") as session:
            result = check_sat_bmc(fts, 6, session)
        assert result.found
        trace = result.lasso.to_trace(fts)
        assert trace.loop_length >= 2

    def test_bmc_exhausts_bound(self, solver_config):
        from backend.bmc import check_sat_bmc
        from backend.solver import SolverSession

        with SolverSession(solver_config, "bmc") as session:
            result = check_sat_bmc(_fts("G b & F !b"), 4, session)
        assert result.found is None
        assert result.lasso is None

    def test_kliveness_proves_absence(self, solver_config):
        from backend.kinduction import prove_no_fair_path
        from backend.solver import SolverSession

        def sessions(name):
            return SolverSession(solver_config, name)

        proof = prove_no_fair_path(_fts("G b & F !b"), sessions, n_max=3, k_max=6)
        assert proof.proved
        assert proof.certificate.counter_bound <= 3

    def test_kliveness_cannot_prove_satisfiable(self, solver_config):
        from backend.kinduction import prove_no_fair_path
        from backend.solver import SolverSession

        def sessions(name):
            return SolverSession(solver_config, name)

        proof = prove_no_fair_path(_fts("G F b"), sessions, n_max=2, k_max=3)
        assert not proof.proved

    def test_bmc_lasso_keeps_the_first_process(self, solver_config):
        from backend.bmc import check_sat_bmc
        from backend.solver import SolverSession

        fts = _fts("G F b & G F (x > 1) & G F (x < 0)")
        with SolverSession(solver_config, "bmc") as session:
            result = check_sat_bmc(fts, 6, session)
            assert result.found
            assert session.restarts == 0
            assert session.check() is True
        assert session.restarts == 0

    def test_houdini_keeps_inductive_literals(self, solver_config):
        from backend.kinduction import counter_system, houdini
        from backend.solver import SolverSession
        from core import logic as L

        system = counter_system(_fts("G b & F !b"))
        with SolverSession(solver_config, "houdini") as session:
            lemmas = houdini(system, session)
            assert session.level == 0
            assert session.restarts == 0
        assert L.pred(">=", system.counter, L.num(0, L.INT)) in lemmas

    def test_recheck_rejects_bogus_certificate(self, solver_config):
        from backend.kinduction import Certificate, counter_system, recheck_certificate
        from backend.solver import SolverSession

        def sessions(name):
            return SolverSession(solver_config, name)

        system = counter_system(_fts("G F b"))
        assert recheck_certificate(system, Certificate(1, 0, []), sessions) is False

    def test_failed_recheck_is_inconclusive(self, solver_config):
        from unittest.mock import patch

        from backend.kinduction import prove_no_fair_path
        from backend.solver import SolverSession

        def sessions(name):
            return SolverSession(solver_config, name)

        with patch("backend.kinduction.recheck_certificate", return_value=False):
            proof = prove_no_fair_path(_fts("G b & F !b"), sessions, n_max=3, k_max=6)
        assert proof.proved is None
        assert proof.certificate is None
        assert "re-check" in proof.reason


class TestChecks:
    """End-to-end check, check_valid and check_sat"""

    def test_sat_with_replayed_witness(self, solver_config):
        from backend.check import SATISFIABLE, check_sat
        from core.parser import parse_file
        from oracle.evaluator import eval_discrete

        problem = parse_file(os.path.join(os.path.dirname(__file__), "..", "problems", "ef_default.xef"))
        verdict = check_sat(problem, solver_config.with_overrides(mode="bmc"))
        assert verdict.kind == SATISFIABLE
        assert eval_discrete(verdict.witness, 0, problem.formula, problem.signature)
        assert verdict.witness.params["def_1"] == 5

    @pytest.mark.parametrize("row", [2, 3, 4])
    def test_benchmarks_valid(self, solver_config, problems_dir, row):
        from backend.check import VALID, check_valid
        from core.parser import parse_file

        problem = parse_file(problems_dir / f"bench_{row:02d}.xef")
        verdict = check_valid(problem, solver_config)
        assert verdict.kind == VALID
        assert verdict.certificate is not None

    @pytest.mark.parametrize("row", [8, 9, 10, 11])
    def test_benchmarks_not_valid(self, solver_config, problems_dir, row, tmp_path):
        from backend.check import NOT_VALID, check_valid, write_witness
        from core.parser import parse_file
        from oracle.traces import IntervalTrace, load_trace

        problem = parse_file(problems_dir / f"bench_{row:02d}.xef")
        verdict = check_valid(problem, solver_config)
        assert verdict.kind == NOT_VALID
        assert isinstance(verdict.witness, IntervalTrace)
        assert verdict.sampled is not None
        path = write_witness(verdict, tmp_path, f"row{row}")
        assert path.name == f"row{row}.witness.json"
        assert isinstance(load_trace(path), IntervalTrace)

    @pytest.mark.slow
    @pytest.mark.parametrize("row", [1, 5, 6, 7])
    def test_benchmarks_not_refuted(self, solver_config, problems_dir, row):
        from backend.check import NOT_VALID, check_valid
        from core.parser import parse_file

        problem = parse_file(problems_dir / f"bench_{row:02d}.xef")
        assert check_valid(problem, solver_config).kind != NOT_VALID

    @pytest.mark.slow
    def test_dense_counterexample_needs_dense_time(self, solver_config, problems_dir):
        from backend.check import NOT_VALID, check
        from core.parser import parse_file

        problem = parse_file(problems_dir / "bench_08.xef")
        verdict = check(problem, solver_config.with_overrides(time_model="discrete"))
        assert verdict.kind != NOT_VALID
