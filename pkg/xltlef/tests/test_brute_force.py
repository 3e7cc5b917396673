"""Tests for bounded brute-force satisfiability"""

import os
import sys
from fractions import Fraction

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


class TestBruteForce:
    """Enumeration of small lassos"""

    def test_finds_model(self, sig):
        from core.parser import parse_formula
        from oracle.brute_force import brute_force_sat
        from oracle.evaluator import eval_discrete

        phi = parse_formula("G F b & G (b -> X !b)", sig)
        result = brute_force_sat(phi, sig)
        assert result.sat
        assert result.verdict == "sat"
        assert eval_discrete(result.witness, 0, phi, sig)
        assert result.witness.loop_length >= 2

    def test_contradiction(self, sig):
        from core.parser import parse_formula
        from oracle.brute_force import TraceBounds, brute_force_sat

        result = brute_force_sat(parse_formula("F (b & !b)", sig), sig, bounds=TraceBounds(2, 2))
        assert not result.sat
        assert result.witness is None
        assert result.verdict == "unsat-within-bounds"
        assert (1, 0) in result.shapes

    def test_candidate_cap(self, sig):
        from core.errors import BoundOverflowError
        from core.parser import parse_formula
        from oracle.brute_force import TraceBounds, brute_force_sat

        phi = parse_formula("G (x < y) & F b", sig)
        with pytest.raises(BoundOverflowError):
            brute_force_sat(phi, sig, bounds=TraceBounds(max_candidates=100))

    def test_default_constant_is_enumerated(self, problems_dir):
        from core.parser import parse_file
        from oracle.brute_force import DomainBounds, TraceBounds, brute_force_sat

        problem = parse_file(problems_dir / "ef_default.xef")
        bounds = TraceBounds(max_prefix=1, max_loop=1)
        assert not brute_force_sat(problem.formula, problem.signature, bounds=bounds).sat
        wider = DomainBounds(reals=(Fraction(0), Fraction(5)))
        result = brute_force_sat(problem.formula, problem.signature, wider, bounds)
        assert result.sat
        assert result.witness.params["def_1"] == 5

    def test_timed_formula_enumerates_timestamps(self, sig):
        from core.parser import parse_formula
        from oracle.brute_force import TraceBounds, brute_force_sat

        phi = parse_formula("!b & F[>=2] b & G[<2] !b", sig)
        result = brute_force_sat(phi, sig, bounds=TraceBounds(max_prefix=2, max_loop=1))
        assert result.sat
        assert any(t >= 2 for t in result.witness.timestamps) or result.witness.shift >= 2
