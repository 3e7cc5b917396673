"""Problem Parser - problem files and formula text to sorted nodes

Grammar built with pyparsing infixNotation. Precedence from loosest:
`-> <->` (right), `|`, `&`, the U/S family (right), then one prefix level
shared by `!` and every temporal prefix operator. Terms use `+ -`, `*`,
unary minus and the postfix event-freezing chain `@F~(...)`.

Problem file:
    xltlef 1
    time_model super_dense;
    var x, y : real;
    param p : real;
    sort S;
    fun f : (real, S) -> bool;
    check valid;
    formula: G (x > 0 -> F[<=p] x < 0);

`#` starts a comment.
"""

import logging
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

import pyparsing as pp

from core import logic as L
from core.errors import Diagnostic, ParseError
from core.logic import Kind, Node, Signature, TimeModel
from core.sortcheck import sort_check

pp.ParserElement.enablePackrat()

FORMAT_VERSION = 1

KEYWORDS = frozenset({
    "U", "S", "U_C", "X", "Y", "Z", "F", "G", "P", "H", "Cf", "Cp",
    "ite", "time", "true", "false", "next", "prev", "inf",
})
DECLARATION_WORDS = frozenset({"var", "param", "sort", "fun", "check", "formula", "time_model", "xltlef"})

PREFIX_KINDS = {
    "F": Kind.F, "G": Kind.G, "P": Kind.P, "H": Kind.H,
    "F~": Kind.F_S, "G~": Kind.G_S, "P~": Kind.P_S, "H~": Kind.H_S,
    "X": Kind.X, "X~": Kind.X_S, "Y": Kind.Y, "Y~": Kind.Y_S, "Z": Kind.Z, "Z~": Kind.Z_S,
}
METRIC_PREFIX_KINDS = {
    "F": Kind.M_F, "G": Kind.M_G, "P": Kind.M_P, "H": Kind.M_H,
    "F~": Kind.M_F_S, "G~": Kind.M_G_S, "P~": Kind.M_P_S, "H~": Kind.M_H_S,
}
UNTIL_KINDS = {"U": Kind.UNTIL, "S": Kind.SINCE, "U~": Kind.UNTIL_S, "S~": Kind.SINCE_S, "U_C": Kind.UNTIL_C}
METRIC_UNTIL_KINDS = {"U": Kind.M_U, "S": Kind.M_S, "U~": Kind.M_U_S, "S~": Kind.M_S_S}


@dataclass
class ProblemFile:
    """A parsed, sort-checked problem."""
    time_model: TimeModel
    signature: Signature
    formula: Node
    check: str = "valid"                 # sat | valid
    source: str = "<input>"
    version: int = FORMAT_VERSION
    positions: Dict[Node, Tuple[int, int]] = field(default_factory=dict)
    warnings: List[Diagnostic] = field(default_factory=list)


# ============================================================================
# PARSE CONTEXT
# ============================================================================

_context = threading.local()


def _mark(node: Node, s: str, loc: int) -> Node:
    positions = getattr(_context, "positions", None)
    if positions is not None and node not in positions:
        positions[node] = (pp.lineno(loc, s), pp.col(loc, s))
    return node


@dataclass(frozen=True)
class _Op:
    """Operator token produced by the grammar, consumed by infix actions."""
    name: str
    interval: Optional[L.Interval] = None
    k: int = 0
    bound: Optional[Node] = None


@dataclass(frozen=True)
class _Decl:
    kind: str
    names: Tuple[str, ...] = ()
    sort: str = ""
    arg_sorts: Tuple[str, ...] = ()
    value: Any = None
    line: int = 0
    column: int = 0


# ============================================================================
# PARSE ACTIONS
# ============================================================================

def _act_number(s, loc, toks):
    return _mark(L.mk(Kind.NUM, (), Fraction(toks[0]), None), s, loc)


def _act_ident(s, loc, toks):
    return _mark(L.mk(Kind.SYM, (), toks[0], None), s, loc)


def _act_call(s, loc, toks):
    return _mark(L.mk(Kind.APPLY, tuple(toks[1:]), toks[0], None), s, loc)


def _act_ite(s, loc, toks):
    return _mark(L.mk(Kind.ITE, (toks[1], toks[2], toks[3]), None, None), s, loc)


def _act_next(s, loc, toks):
    kind = Kind.NEXT if toks[0] == "next" else Kind.PREV
    return _mark(L.mk(kind, (toks[1],), None, None), s, loc)


def _act_time(s, loc, toks):
    return _mark(L.time_(), s, loc)


def _act_postfix(s, loc, toks):
    term = toks[0]
    for suffix, phi in zip(toks[1::2], toks[2::2]):
        direction, strict, k = suffix
        future = direction == "F"
        if k > 1:
            kind = Kind.AT_NEXT_ITER if future else Kind.AT_LAST_ITER
            term = L.mk(kind, (term, phi), k, None)
        elif strict:
            term = L.mk(Kind.AT_NEXT if future else Kind.AT_LAST, (term, phi), None, None)
        else:
            term = L.mk(Kind.AT_NEXT_NS if future else Kind.AT_LAST_NS, (term, phi), None, None)
        _mark(term, s, loc)
    return term


def _act_ef_suffix(s, loc, toks):
    text = toks[0]
    direction = text[1]
    strict = "~" in text
    k = int(text.split("^")[1]) if "^" in text else 1
    if k != 1 and not strict:
        raise pp.ParseFatalException(s, loc, "iterated event-freezing needs the strict form @F~^k / @P~^k")
    return [(direction, strict, k)]


def _act_neg(s, loc, toks):
    operand = toks[0][1]
    if operand.kind is Kind.NUM:
        return _mark(L.mk(Kind.NUM, (), -operand.payload, None), s, loc)
    return _mark(L.mk(Kind.APPLY, (operand,), "neg", None), s, loc)


def _act_arith(s, loc, toks):
    items = toks[0]
    result = items[0]
    for op, rhs in zip(items[1::2], items[2::2]):
        if op == "/":
            if result.kind is not Kind.NUM or rhs.kind is not Kind.NUM:
                raise pp.ParseFatalException(s, loc, "division is only supported between numeric literals")
            if rhs.payload == 0:
                raise pp.ParseFatalException(s, loc, "division by zero")
            result = L.mk(Kind.NUM, (), result.payload / rhs.payload, None)
        else:
            result = L.mk(Kind.APPLY, (result, rhs), op, None)
        _mark(result, s, loc)
    return result


def _act_comparison(s, loc, toks):
    lhs, op, rhs = toks
    return _mark(L.mk(Kind.PRED, (lhs, rhs), op, None), s, loc)


def _act_const(s, loc, toks):
    return _mark(L.true() if toks[0] == "true" else L.false(), s, loc)


def _act_interval_short(s, loc, toks):
    op, value = toks
    zero = L.mk(Kind.NUM, (), Fraction(0), None)
    if op == "<=":
        return L.Interval(zero, value, False, False)
    if op == "<":
        return L.Interval(zero, value, False, True)
    if op == ">=":
        return L.Interval(value, None, False, True)
    if op == ">":
        return L.Interval(value, None, True, True)
    return L.Interval(value, value, False, False)


def _act_interval_brackets(s, loc, toks):
    left, lo, hi, right = toks
    if hi == "inf":
        if right != ")":
            raise pp.ParseFatalException(s, loc, "an unbounded interval must end with ')'")
        return L.Interval(lo, None, left == "(", True)
    return L.Interval(lo, hi, left == "(", right == ")")


def _act_prefix_temporal(s, loc, toks):
    name = toks[0]
    interval = toks[1] if len(toks) > 1 else None
    if interval is not None and name not in METRIC_PREFIX_KINDS:
        raise pp.ParseFatalException(s, loc, f"operator {name} takes no interval")
    return _Op(name, interval)


def _act_event(s, loc, toks):
    return _Op(toks[0], toks[1])


def _act_count(s, loc, toks):
    name, k, bound = toks
    return _Op(name, None, int(k), bound)


def _act_until_op(s, loc, toks):
    name = toks[0]
    interval = toks[1] if len(toks) > 1 else None
    if interval is not None and name not in METRIC_UNTIL_KINDS:
        raise pp.ParseFatalException(s, loc, f"operator {name} takes no interval")
    return _Op(name, interval)


def _act_prefix(s, loc, toks):
    op, operand = toks[0]
    if op == "!":
        node = L.not_(operand)
    elif op.name == "|>":
        node = L.mk(Kind.EVENT_NEXT, (operand,), op.interval, L.BOOL)
    elif op.name == "<|":
        node = L.mk(Kind.EVENT_LAST, (operand,), op.interval, L.BOOL)
    elif op.name in ("Cf", "Cp"):
        kind = Kind.COUNT_NEXT if op.name == "Cf" else Kind.COUNT_LAST
        node = L.mk(kind, (operand, op.bound), op.k, L.BOOL)
    elif op.interval is not None:
        node = L.mk(METRIC_PREFIX_KINDS[op.name], (operand,), op.interval, L.BOOL)
    else:
        node = L.unary(PREFIX_KINDS[op.name], operand)
    return _mark(node, s, loc)


def _act_until(s, loc, toks):
    items = toks[0]
    result = items[-1]
    for op, lhs in zip(reversed(items[1::2]), reversed(items[0:-1:2])):
        if op.interval is not None:
            result = L.mk(METRIC_UNTIL_KINDS[op.name], (lhs, result), op.interval, L.BOOL)
        else:
            result = L.binary(UNTIL_KINDS[op.name], lhs, result)
    return _mark(result, s, loc)


def _act_and(s, loc, toks):
    items = toks[0]
    result = items[0]
    for rhs in items[2::2]:
        result = L.and_(result, rhs)
    return _mark(result, s, loc)


def _act_or(s, loc, toks):
    items = toks[0]
    result = items[0]
    for rhs in items[2::2]:
        result = L.or_(result, rhs)
    return _mark(result, s, loc)


def _act_imp(s, loc, toks):
    items = toks[0]
    result = items[-1]
    for op, lhs in zip(reversed(items[1::2]), reversed(items[0:-1:2])):
        result = L.implies(lhs, result) if op == "->" else L.iff(lhs, result)
    return _mark(result, s, loc)


# ============================================================================
# GRAMMAR
# ============================================================================

def _build_grammar():
    LPAR, RPAR, LBRACK, RBRACK, COMMA, SEMI, COLON = map(pp.Suppress, "()[],;:")

    term = pp.Forward()
    formula = pp.Forward()

    number = pp.Regex(r"\d+(\.\d+)?").setParseAction(_act_number)
    name = pp.Regex(r"[A-Za-z_][A-Za-z0-9_]*")
    ident = name.copy().addCondition(lambda toks: toks[0] not in KEYWORDS)

    call = (ident + LPAR + pp.Optional(pp.delimitedList(term)) + RPAR).setParseAction(_act_call)
    ite_term = (pp.Keyword("ite") + LPAR + formula + COMMA + term + COMMA + term + RPAR).setParseAction(_act_ite)
    step_term = ((pp.Keyword("next") | pp.Keyword("prev")) + LPAR + term + RPAR).setParseAction(_act_next)
    time_term = pp.Keyword("time").setParseAction(_act_time)
    primary = (number | ite_term | step_term | time_term | call
               | ident.copy().setParseAction(_act_ident) | (LPAR + term + RPAR))

    ef_suffix = pp.Regex(r"@[FP]~?(\^\d+)?").setParseAction(_act_ef_suffix)
    postfix = (primary + pp.ZeroOrMore(ef_suffix + LPAR + formula + RPAR)).setParseAction(_act_postfix)

    minus = pp.Regex(r"-(?!>)")
    term <<= pp.infixNotation(postfix, [
        (minus, 1, pp.opAssoc.RIGHT, _act_neg),
        (pp.Regex(r"[*/]"), 2, pp.opAssoc.LEFT, _act_arith),
        (pp.Regex(r"\+|-(?!>)"), 2, pp.opAssoc.LEFT, _act_arith),
    ])

    relop = pp.Regex(r"<=|>=|!=|<(?![-|])|>|=")
    comparison = (term + relop + term).setParseAction(_act_comparison)
    constant = (pp.Keyword("true") | pp.Keyword("false")).setParseAction(_act_const)
    atom = comparison | constant | term

    short_interval = (pp.Regex(r"<=|>=|<|>|=") + term).setParseAction(_act_interval_short)
    bracket_interval = (pp.oneOf("[ (") + term + COMMA + (pp.Keyword("inf") | term)
                        + pp.oneOf("] )")).setParseAction(_act_interval_brackets)
    interval = LBRACK + (short_interval | bracket_interval) + RBRACK

    temporal_prefix = (pp.Regex(r"[FGPHXYZ]~?(?![\w~])") + pp.Optional(interval)).setParseAction(_act_prefix_temporal)
    event_prefix = (pp.Regex(r"\|>|<\|") + interval).setParseAction(_act_event)
    count_prefix = (pp.Regex(r"C[fp](?!\w)") + LBRACK + pp.Regex(r"\d+") + RBRACK
                    + LBRACK + pp.Suppress("<") + term + RBRACK).setParseAction(_act_count)
    prefix_op = pp.Regex(r"!(?!=)") | event_prefix | count_prefix | temporal_prefix
    until_op = (pp.Regex(r"(U_C|U~|S~|U|S)(?![\w~])") + pp.Optional(interval)).setParseAction(_act_until_op)

    formula <<= pp.infixNotation(atom, [
        (prefix_op, 1, pp.opAssoc.RIGHT, _act_prefix),
        (until_op, 2, pp.opAssoc.RIGHT, _act_until),
        (pp.Regex(r"&"), 2, pp.opAssoc.LEFT, _act_and),
        (pp.Regex(r"\|(?!>)"), 2, pp.opAssoc.LEFT, _act_or),
        (pp.Regex(r"<->|->"), 2, pp.opAssoc.RIGHT, _act_imp),
    ])

    def decl(kind):
        def action(s, loc, toks):
            return _Decl(kind, line=pp.lineno(loc, s), column=pp.col(loc, s), **_decl_fields(kind, toks))
        return action

    header = (pp.Keyword("xltlef") + pp.Regex(r"\d+")).setParseAction(decl("header"))
    time_model_decl = (pp.Keyword("time_model") + name + SEMI).setParseAction(decl("time_model"))
    var_decl = (pp.Keyword("var") + pp.Group(pp.delimitedList(name)) + COLON + name + SEMI).setParseAction(decl("var"))
    param_decl = (pp.Keyword("param") + pp.Group(pp.delimitedList(name)) + COLON + name + SEMI).setParseAction(decl("param"))
    sort_decl = (pp.Keyword("sort") + name + SEMI).setParseAction(decl("sort"))
    fun_decl = (pp.Keyword("fun") + name + COLON + LPAR + pp.Group(pp.Optional(pp.delimitedList(name))) + RPAR
                + pp.Suppress("->") + name + SEMI).setParseAction(decl("fun"))
    check_decl = (pp.Keyword("check") + name + SEMI).setParseAction(decl("check"))
    formula_decl = (pp.Keyword("formula") + COLON + formula + SEMI).setParseAction(decl("formula"))

    declaration = time_model_decl | var_decl | param_decl | sort_decl | fun_decl | check_decl | formula_decl
    problem = header + pp.ZeroOrMore(declaration) + pp.StringEnd()
    problem.ignore(pp.pythonStyleComment)

    bare = formula + pp.StringEnd()
    bare.ignore(pp.pythonStyleComment)
    return problem, bare


def _decl_fields(kind: str, toks) -> Dict[str, Any]:
    if kind == "header":
        return {"value": int(toks[1])}
    if kind in ("time_model", "check"):
        return {"value": toks[1]}
    if kind in ("var", "param"):
        return {"names": tuple(toks[1]), "sort": toks[2]}
    if kind == "sort":
        return {"names": (toks[1],)}
    if kind == "fun":
        return {"names": (toks[1],), "arg_sorts": tuple(toks[2]), "sort": toks[3]}
    return {"value": toks[1]}


_PROBLEM, _FORMULA = _build_grammar()
_grammar_lock = threading.Lock()


def _run(grammar: pp.ParserElement, text: str, source: str) -> Tuple[List[Any], Dict[Node, Tuple[int, int]]]:
    positions: Dict[Node, Tuple[int, int]] = {}
    # packrat caches are shared by the grammar objects
    with _grammar_lock:
        _context.positions = positions
        try:
            tokens = grammar.parseString(text, parseAll=True)
        except pp.ParseBaseException as e:
            message = e.msg if isinstance(e, pp.ParseFatalException) else f"syntax error: {e.msg}"
            raise ParseError([Diagnostic(e.lineno, e.col, message)], source)
        finally:
            _context.positions = None
    return list(tokens), positions


# ============================================================================
# PUBLIC API
# ============================================================================

def parse(text: str, source: str = "<input>", pedantic: bool = False) -> ProblemFile:
    """Parse and sort-check a problem file."""
    tokens, positions = _run(_PROBLEM, text, source)
    errors: List[Diagnostic] = []
    sig = Signature()
    time_model = TimeModel.SUPER_DENSE
    check = "valid"
    raw_formula: Optional[Node] = None
    version = FORMAT_VERSION

    for d in tokens:
        def fail(message: str) -> None:
            errors.append(Diagnostic(d.line, d.column, message))

        if d.kind == "header":
            version = d.value
            if version != FORMAT_VERSION:
                fail(f"unsupported format version {version}")
        elif d.kind == "time_model":
            try:
                time_model = TimeModel.from_name(d.value)
            except ValueError as e:
                fail(str(e))
        elif d.kind == "check":
            if d.value not in ("sat", "valid"):
                fail(f"unknown check '{d.value}' (expected sat or valid)")
            check = d.value
        elif d.kind == "formula":
            if raw_formula is not None:
                fail("exactly one formula per file")
            raw_formula = d.value
        else:
            _declare(sig, d, fail)

    if raw_formula is None and not errors:
        errors.append(Diagnostic(1, 1, "missing 'formula:' declaration"))
    if errors:
        raise ParseError(errors, source)

    warnings: List[Diagnostic] = []
    formula = sort_check(raw_formula, sig, positions, pedantic=pedantic, warnings=warnings, source=source)
    for w in warnings:
        logging.warning(f"{source}:{w}")
    logging.info(f"Parsed {source}: {time_model.value}, check {check}, {L.node_count(formula)} nodes")
    return ProblemFile(time_model, sig, formula, check, source, version, positions, warnings)


def _declare(sig: Signature, d: _Decl, fail) -> None:
    # sort names never occur inside formulas, so operator letters are free for them
    reserved = DECLARATION_WORDS if d.kind == "sort" else KEYWORDS | DECLARATION_WORDS
    for n in d.names:
        if n in reserved:
            fail(f"'{n}' is a reserved word")
            return
    try:
        if d.kind == "sort":
            if d.names[0] in L.BUILTIN_SORTS:
                fail(f"'{d.names[0]}' is a built-in sort")
                return
            sig.declare_sort(d.names[0])
            return
        result = sig.sort_named(d.sort)
        if result is None:
            fail(f"unknown sort '{d.sort}'")
            return
        if d.kind == "var":
            for n in d.names:
                sig.declare_var(n, result)
        elif d.kind == "param":
            for n in d.names:
                sig.declare_param(n, result)
        elif d.kind == "fun":
            arg_sorts = [sig.sort_named(a) for a in d.arg_sorts]
            if None in arg_sorts:
                fail(f"unknown sort in signature of '{d.names[0]}'")
                return
            sig.declare_function(d.names[0], arg_sorts, result)
    except ValueError as e:
        fail(str(e))


def parse_formula(text: str, sig: Signature, allow_next: bool = False, source: str = "<formula>") -> Node:
    """Parse a bare formula against an existing signature."""
    tokens, positions = _run(_FORMULA, text, source)
    return sort_check(tokens[0], sig, positions, allow_next=allow_next, source=source)


def parse_file(path, pedantic: bool = False) -> ProblemFile:
    with open(path, 'r') as f:
        return parse(f.read(), str(path), pedantic)
