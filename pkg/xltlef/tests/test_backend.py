"""Tests for clock normalization, the transition system and its text export

None of these start a solver.
"""

import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


def _run(formula: str, model: str = "discrete", check: str = "sat", decls: str = "var b, c : bool;\nvar x : real;"):
    from core.parser import parse
    from core.pipeline import run_pipeline

    text = f"xltlef 1\ntime_model {model};\n{decls}\ncheck {check};\nformula: {formula};\n"
    return run_pipeline(parse(text, "inline.xef"))


class TestClockNormalize:
    """Time-valued variables become clocks"""

    def test_untimed_problem(self):
        from backend.clocks import clock_normalize

        normalized = clock_normalize(_run("G (b -> F c)").ltlnext)
        assert normalized.normalized
        assert normalized.clocks == {}
        assert not normalized.keeps_time

    def test_time_valued_prophecy_gets_clock(self):
        from backend.clocks import clock_normalize
        from core import logic as L

        run = _run("G (b -> time@F~(c) - time <= 2)")
        timed = [b.var for b in run.ltlnext.bindings if b.ef_term.sort == L.REAL]
        assert timed
        normalized = clock_normalize(run.ltlnext)
        used = set(L.free_symbols(normalized.formula).state_vars)
        for name in timed:
            assert name in normalized.clocks
            assert name not in used
            assert normalized.clocks[name] in normalized.signature.state_vars

    def test_idempotent(self):
        from backend.clocks import clock_normalize

        once = clock_normalize(_run("F[<=2] b").ltlnext)
        assert clock_normalize(once) is once


class TestBuildFts:
    """Tableau construction"""

    def test_shape(self):
        from backend.fts import build_fts
        from core import logic as L
        from core.logic import Kind

        fts = build_fts(_run("G (b -> F c)").ltlnext)
        assert fts.justice
        assert fts.monitors
        assert {"b", "c"} <= set(fts.frame_vars)
        assert not L.contains_kind(fts.init, {Kind.NEXT})
        assert all(not L.contains_kind(j, {Kind.NEXT}) for j in fts.justice)
        assert L.contains_kind(fts.trans, {Kind.NEXT})
        assert fts.drift == {}

    def test_dense_problem_keeps_sampling(self):
        from backend.fts import build_fts

        run = _run("F b", model="dense", check="valid")
        fts = build_fts(run.ltlnext)
        assert fts.sampling.iota == run.discretized.sampling.iota
        assert fts.sampling.iota in fts.state_vars

    def test_event_freezing_problem(self, problems_dir):
        from backend.fts import build_fts
        from core.parser import parse_file
        from core.pipeline import run_pipeline

        run = run_pipeline(parse_file(problems_dir / "ef_default.xef"))
        fts = build_fts(run.ltlnext)
        assert "def_1" in fts.params
        assert run.ltlnext.bindings[0].var in fts.state_vars


class TestExport:
    """Text form of the transition system"""

    def test_header_and_sections(self):
        from backend.export import HEADER, SECTIONS, export
        from backend.fts import build_fts

        text = export(build_fts(_run("G (b -> F c)").ltlnext))
        lines = text.splitlines()
        assert lines[0] == HEADER
        sections = [line for line in lines if line in SECTIONS]
        assert sections == list(SECTIONS)

    @pytest.mark.parametrize("formula", ["G (b -> F c)", "F[<=2] b"])
    def test_read_back_exports_same_text(self, formula):
        from backend.export import export, read_fts
        from backend.fts import build_fts

        text = export(build_fts(_run(formula).ltlnext))
        assert export(read_fts(text)) == text

    def test_file_round_trip(self, tmp_path):
        from backend.export import export, read_fts_file, write_export
        from backend.fts import build_fts

        fts = build_fts(_run("F[<=2] b").ltlnext)
        path = write_export(fts, tmp_path / "model.fts")
        assert export(read_fts_file(path)) == export(fts)

    def test_unknown_format(self):
        from backend.export import export
        from backend.fts import build_fts

        with pytest.raises(ValueError):
            export(build_fts(_run("F b").ltlnext), "smv")

    def test_bad_header(self):
        from backend.export import read_fts
        from core.errors import ParseError

        with pytest.raises(ParseError):
            read_fts("-- something else\nVAR\n  b : bool;\n")

    def test_bad_item(self):
        from backend.export import HEADER, read_fts
        from core.errors import ParseError

        with pytest.raises(ParseError) as exc:
            read_fts(f"{HEADER}\nVAR\n  b : bool\n")
        assert exc.value.diagnostics[0].line == 3
