"""Unit tests for the problem-file parser, sort checker and printer"""

import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

PROBLEM = """xltlef 1
# comment line
time_model dense;
var b, c : bool;
var x : real;
param p : real;
check sat;
formula: G (b -> F[<=p] x < 0);
"""


class TestProblemFiles:
    """Whole problem files"""

    def test_declarations_and_header(self):
        from core import logic as L
        from core.logic import TimeModel
        from core.parser import parse

        problem = parse(PROBLEM, "inline.xef")
        assert problem.time_model is TimeModel.DENSE
        assert problem.check == "sat"
        assert problem.version == 1
        assert problem.signature.state_vars == {"b": L.BOOL, "c": L.BOOL, "x": L.REAL}
        assert problem.signature.params == {"p": L.REAL}
        assert problem.source == "inline.xef"

    def test_defaults(self):
        from core.logic import TimeModel
        from core.parser import parse

        problem = parse("xltlef 1\nvar b : bool;\nformula: F b;\n")
        assert problem.time_model is TimeModel.SUPER_DENSE
        assert problem.check == "valid"

    def test_missing_formula(self):
        from core.errors import ParseError
        from core.parser import parse

        with pytest.raises(ParseError) as exc:
            parse("xltlef 1\nvar b : bool;\n")
        assert "missing" in exc.value.diagnostics[0].message

    def test_unsupported_version(self):
        from core.errors import ParseError
        from core.parser import parse

        with pytest.raises(ParseError) as exc:
            parse("xltlef 2\nvar b : bool;\nformula: b;\n")
        assert "version" in str(exc.value)

    def test_unknown_check(self):
        from core.errors import ParseError
        from core.parser import parse

        with pytest.raises(ParseError):
            parse("xltlef 1\nvar b : bool;\ncheck maybe;\nformula: b;\n")

    def test_reserved_word_as_name(self):
        from core.errors import ParseError
        from core.parser import parse

        with pytest.raises(ParseError) as exc:
            parse("xltlef 1\nvar F : bool;\nformula: true;\n")
        assert "reserved" in str(exc.value)

    def test_syntax_error_position(self):
        from core.errors import ParseError
        from core.parser import parse

        with pytest.raises(ParseError) as exc:
            parse("xltlef 1\nvar b : bool;\nformula: b & ;\n", "bad.xef")
        assert exc.value.source == "bad.xef"
        assert exc.value.diagnostics[0].line == 3

    def test_every_sort_error_is_reported(self):
        from core.errors import SortError
        from core.parser import parse

        with pytest.raises(SortError) as exc:
            parse("xltlef 1\nvar b : bool;\nformula:\n  y > 0 & z > 0;\n")
        diagnostics = exc.value.diagnostics
        assert len(diagnostics) == 2
        assert all(d.line == 4 for d in diagnostics)
        assert "unknown symbol 'y'" in diagnostics[0].message

    def test_event_freezing_defaults_registered(self, problems_dir):
        from core.parser import parse_file

        problem = parse_file(problems_dir / "ef_default.xef")
        assert "def_1" in problem.signature.params
        assert len(problem.signature.defaults) == 1

    def test_checked_in_problems_parse_cleanly(self, problems_dir):
        from core.parser import parse_file

        files = sorted(problems_dir.glob("*.xef"))
        assert len([f for f in files if f.name.startswith("bench_")]) == 11
        for path in files:
            problem = parse_file(path)
            assert problem.warnings == []


class TestFormulaSyntax:
    """Precedence, associativity and operator forms"""

    def test_prefix_binds_tighter_than_and(self, sig):
        from core import logic as L
        from core.logic import Kind
        from core.parser import parse_formula

        b, c = L.var("b"), L.var("c")
        assert parse_formula("!F b & c", sig) is L.and_(L.not_(L.unary(Kind.F, b)), c)

    def test_until_is_right_associative(self, sig):
        from core import logic as L
        from core.logic import Kind
        from core.parser import parse_formula

        b, c = L.var("b"), L.var("c")
        expected = L.binary(Kind.UNTIL, b, L.binary(Kind.UNTIL, c, b))
        assert parse_formula("b U c U b", sig) is expected

    def test_implication_is_right_associative(self, sig):
        from core import logic as L
        from core.logic import Kind
        from core.parser import parse_formula

        b, c = L.var("b"), L.var("c")
        expected = L.implies(L.unary(Kind.F, b), L.iff(L.unary(Kind.G, c), b))
        assert parse_formula("F b -> G c <-> b", sig) is expected

    def test_not_equal(self, sig):
        from core import logic as L
        from core.parser import parse_formula

        x, y = L.var("x", L.REAL), L.var("y", L.REAL)
        assert parse_formula("x != y", sig) is L.not_(L.pred("=", x, y))
        assert parse_formula("!x = y", sig) is L.not_(L.pred("=", x, y))

    def test_metric_intervals(self, sig):
        from core import logic as L
        from core.logic import Interval, Kind
        from core.parser import parse_formula

        b, p = L.var("b"), L.param("p")
        assert parse_formula("F[<=p] b", sig) is L.metric(Kind.M_F, (b,), Interval.le(p))
        assert parse_formula("G~[>2] b", sig) is L.metric(Kind.M_G_S, (b,), Interval.gt(L.num(2)))
        general = Interval(L.num(1), L.num(2), True, False)
        assert parse_formula("P[(1, 2]] b", sig) is L.metric(Kind.M_P, (b,), general)
        unbounded = Interval(L.num(1), None, False, True)
        assert parse_formula("H[[1, inf)] b", sig) is L.metric(Kind.M_H, (b,), unbounded)

    def test_event_clock_and_counting(self, sig):
        from core import logic as L
        from core.logic import Interval, Kind
        from core.parser import parse_formula

        b, p = L.var("b"), L.param("p")
        assert parse_formula("|>[=p] b", sig) is L.metric(Kind.EVENT_NEXT, (b,), Interval.eq(p))
        assert parse_formula("<|[<=p] b", sig) is L.metric(Kind.EVENT_LAST, (b,), Interval.le(p))
        assert parse_formula("Cf[2][<3] b", sig) is L.count(Kind.COUNT_NEXT, b, 2, L.num(3))

    def test_event_freezing_suffixes(self, sig):
        from core import logic as L
        from core.logic import Kind
        from core.parser import parse_formula

        x, y, b = L.var("x", L.REAL), L.var("y", L.REAL), L.var("b")
        assert parse_formula("x@F(b) = y", sig) is L.pred("=", L.at_next_ns(x, b), y)
        assert parse_formula("x@P~(b) = y", sig) is L.pred("=", L.at_last(x, b), y)
        iterated = L.at_iter(Kind.AT_NEXT_ITER, x, b, 2)
        assert parse_formula("x@F~^2(b) = y", sig) is L.pred("=", iterated, y)

    def test_iterated_suffix_must_be_strict(self, sig):
        from core.errors import ParseError
        from core.parser import parse_formula

        with pytest.raises(ParseError) as exc:
            parse_formula("x@F^2(b) = y", sig)
        assert "strict" in str(exc.value)

    def test_literal_division(self, sig):
        from fractions import Fraction

        from core.errors import ParseError
        from core.parser import parse_formula

        phi = parse_formula("x < 1/2", sig)
        assert phi.args[1].payload == Fraction(1, 2)
        with pytest.raises(ParseError):
            parse_formula("x / 2 < 1", sig)


class TestSortChecking:
    """Well-formedness rules beyond the grammar"""

    def test_time_equality_rejected(self, sig):
        from core.errors import SortError
        from core.parser import parse_formula

        with pytest.raises(SortError) as exc:
            parse_formula("time = 1", sig)
        assert "not with =" in str(exc.value)

    def test_time_bound_must_be_rigid(self, sig):
        from core.errors import SortError
        from core.parser import parse_formula

        with pytest.raises(SortError):
            parse_formula("time < x", sig)

    def test_time_atom_is_oriented(self, sig):
        from core import logic as L
        from core.parser import parse_formula

        phi = parse_formula("2 > time", sig)
        assert phi is L.pred("<", L.time_(), L.num(2))

    def test_interval_endpoint_must_be_rigid(self, sig):
        from core.errors import SortError
        from core.parser import parse_formula

        with pytest.raises(SortError) as exc:
            parse_formula("F[<=x] b", sig)
        assert "rigid" in str(exc.value)

    def test_empty_interval(self, sig):
        from core.errors import SortError
        from core.parser import parse_formula

        with pytest.raises(SortError):
            parse_formula("F[(2, 2]] b", sig)

    def test_sort_mismatch(self, sig):
        from core.errors import SortError
        from core.parser import parse_formula

        with pytest.raises(SortError):
            parse_formula("b < x", sig)

    def test_next_only_where_allowed(self, sig):
        from core import logic as L
        from core.errors import SortError
        from core.parser import parse_formula

        with pytest.raises(SortError):
            parse_formula("next(x) = x", sig)
        x = L.var("x", L.REAL)
        assert parse_formula("next(x) = x", sig, allow_next=True) is L.pred("=", L.next_(x), x)

    def test_pedantic_difference_warning(self):
        from core.parser import parse

        text = "xltlef 1\nvar b : bool;\nformula: time@F~(b) - time <= 1;\n"
        assert parse(text).warnings == []
        warnings = parse(text, pedantic=True).warnings
        assert len(warnings) == 1
        assert warnings[0].severity == "warning"

    def test_functions_and_sorts(self):
        from core import logic as L
        from core.parser import parse

        problem = parse("xltlef 1\nsort S;\nvar s : S;\nvar x : real;\n"
                        "fun f : (S, real) -> bool;\nformula: f(s, x) & s = s;\n")
        decl = problem.signature.functions["f"]
        assert decl.arg_sorts == (problem.signature.sorts["S"], L.REAL)
        assert decl.result == L.BOOL

    def test_builtin_sort_cannot_be_redeclared(self):
        from core.errors import ParseError
        from core.parser import parse

        with pytest.raises(ParseError) as exc:
            parse("xltlef 1\nsort real;\nvar b : bool;\nformula: b;\n")
        assert "built-in" in str(exc.value)

    def test_declaration_word_as_sort(self):
        from core.errors import ParseError
        from core.parser import parse

        with pytest.raises(ParseError):
            parse("xltlef 1\nsort var;\nvar b : bool;\nformula: b;\n")

    def test_arity_mismatch(self):
        from core.errors import SortError
        from core.parser import parse

        with pytest.raises(SortError) as exc:
            parse("xltlef 1\nvar x : real;\nfun f : (real) -> real;\nformula: f(x, x) > 0;\n")
        assert "arity" in str(exc.value)


class TestPrinter:
    """pretty output parses back to the same node"""

    TEXTS = [
        "G (b -> F[<=p] x < 0)",
        "x@F~(b) = y",
        "x@P(c) > 0.5",
        "b U~ c S c",
        "Cp[2][<p] (b | c)",
        "|>[=p] |>[=p] b",
        "H~[(1, 3]] b",
        "x@F~^2(b) - x >= 0",
        "time@F~(b) - time <= p",
        "!(b & c) | X~ b",
        "-x + 2 * y < 3",
        "ite(b, x, y) = x",
        "(F b -> c) & G !c",
    ]

    def test_round_trip(self, sig):
        from core.parser import parse_formula
        from core.printer import pretty

        for text in self.TEXTS:
            phi = parse_formula(text, sig)
            assert parse_formula(pretty(phi), sig) is phi, text

    def test_numbers(self):
        from fractions import Fraction

        from core.printer import format_number

        assert format_number(Fraction(3)) == "3"
        assert format_number(Fraction(1, 4)) == "0.25"
        assert format_number(Fraction(-1, 3)) == "-(1/3)"

    def test_minimal_parentheses(self, sig):
        from core.parser import parse_formula
        from core.printer import pretty

        assert pretty(parse_formula("(b & c) | b", sig)) == "b & c | b"
        assert pretty(parse_formula("b & (c | b)", sig)) == "b & (c | b)"
