"""Printer - precedence-aware rendering of nodes in problem-file syntax

pretty(node) is accepted by parse_formula for every node the parser can
produce, with the same structure.
"""

from fractions import Fraction
from typing import Optional

from core.logic import Interval, Kind, Node

# formula levels, loosest first
_IMP, _OR, _AND, _UNTIL, _PREFIX, _ATOM = range(1, 7)
# term levels
_SUM, _PRODUCT, _NEG, _POSTFIX, _PRIMARY = range(1, 6)

_PREFIX_NAMES = {
    Kind.F: "F", Kind.G: "G", Kind.P: "P", Kind.H: "H",
    Kind.F_S: "F~", Kind.G_S: "G~", Kind.P_S: "P~", Kind.H_S: "H~",
    Kind.X: "X", Kind.X_S: "X~", Kind.Y: "Y", Kind.Y_S: "Y~", Kind.Z: "Z", Kind.Z_S: "Z~",
    Kind.M_F: "F", Kind.M_G: "G", Kind.M_P: "P", Kind.M_H: "H",
    Kind.M_F_S: "F~", Kind.M_G_S: "G~", Kind.M_P_S: "P~", Kind.M_H_S: "H~",
    Kind.EVENT_NEXT: "|>", Kind.EVENT_LAST: "<|",
}
_UNTIL_NAMES = {
    Kind.UNTIL_S: "U~", Kind.SINCE_S: "S~", Kind.UNTIL: "U", Kind.SINCE: "S", Kind.UNTIL_C: "U_C",
    Kind.M_U: "U", Kind.M_S: "S", Kind.M_U_S: "U~", Kind.M_S_S: "S~",
}
_EF_SUFFIX = {
    Kind.AT_NEXT: "@F~", Kind.AT_LAST: "@P~", Kind.AT_NEXT_NS: "@F", Kind.AT_LAST_NS: "@P",
    Kind.AT_NEXT_ITER: "@F~", Kind.AT_LAST_ITER: "@P~",
}


def pretty(node: Node) -> str:
    if node.kind in _TERM_LEVEL:
        return _term(node, 0)
    return _formula(node, 0)


def format_number(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    text = _decimal(abs(value))
    if text is None:
        text = f"({abs(value.numerator)}/{value.denominator})"
    return f"-{text}" if value < 0 else text


def _decimal(value: Fraction) -> Optional[str]:
    d = value.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return None
    digits = max(twos, fives)
    scaled = value * 10 ** digits
    whole, frac = divmod(scaled.numerator, 10 ** digits)
    return f"{whole}.{str(frac).rjust(digits, '0')}"


def format_interval(interval: Interval) -> str:
    short = interval.shorthand()
    if short is not None:
        op, bound = short
        return f"[{op}{_term(bound, _SUM)}]"
    left = "(" if interval.lo_open else "["
    hi = "inf" if interval.hi is None else _term(interval.hi, _SUM)
    right = ")" if interval.hi_open else "]"
    return f"[{left}{_term(interval.lo, _SUM)}, {hi}{right}]"


def _paren(text: str, needed: bool) -> str:
    return f"({text})" if needed else text


# ============================================================================
# FORMULAS
# ============================================================================

def _formula(node: Node, ctx: int) -> str:
    kind = node.kind
    if kind is Kind.TRUE:
        return "true"
    if kind is Kind.FALSE:
        return "false"
    if kind is Kind.PRED:
        text = f"{_term(node.args[0], _SUM)} {node.payload} {_term(node.args[1], _SUM)}"
        return text
    if kind in _TERM_LEVEL:
        return _term(node, 0)
    if kind is Kind.NOT:
        inner = node.args[0]
        if inner.kind is Kind.PRED and inner.payload == "=":
            return f"{_term(inner.args[0], _SUM)} != {_term(inner.args[1], _SUM)}"
        return _paren(f"!{_formula(inner, _PREFIX)}", ctx > _PREFIX)
    if kind in _PREFIX_NAMES:
        name = _PREFIX_NAMES[kind]
        if isinstance(node.payload, Interval):
            name += format_interval(node.payload)
        return _paren(f"{name} {_formula(node.args[0], _PREFIX)}", ctx > _PREFIX)
    if kind in (Kind.COUNT_NEXT, Kind.COUNT_LAST):
        name = "Cf" if kind is Kind.COUNT_NEXT else "Cp"
        text = f"{name}[{node.payload}][<{_term(node.args[1], _SUM)}] {_formula(node.args[0], _PREFIX)}"
        return _paren(text, ctx > _PREFIX)
    if kind in _UNTIL_NAMES:
        name = _UNTIL_NAMES[kind]
        if isinstance(node.payload, Interval):
            name += format_interval(node.payload)
        text = f"{_formula(node.args[0], _PREFIX)} {name} {_formula(node.args[1], _UNTIL)}"
        return _paren(text, ctx > _UNTIL)
    if kind is Kind.AND:
        return _paren(f"{_formula(node.args[0], _AND)} & {_formula(node.args[1], _UNTIL)}", ctx > _AND)
    if kind is Kind.OR:
        return _paren(f"{_formula(node.args[0], _OR)} | {_formula(node.args[1], _AND)}", ctx > _OR)
    if kind in (Kind.IMPLIES, Kind.IFF):
        op = "->" if kind is Kind.IMPLIES else "<->"
        return _paren(f"{_formula(node.args[0], _OR)} {op} {_formula(node.args[1], _IMP)}", ctx > _IMP)
    raise ValueError(f"cannot print {kind.value}")


# ============================================================================
# TERMS
# ============================================================================

_TERM_LEVEL = frozenset({
    Kind.NUM, Kind.VAR, Kind.PARAM, Kind.TIME, Kind.APPLY, Kind.ITE, Kind.NEXT, Kind.PREV, Kind.SYM,
    Kind.AT_NEXT, Kind.AT_LAST, Kind.AT_NEXT_NS, Kind.AT_LAST_NS, Kind.AT_NEXT_ITER, Kind.AT_LAST_ITER,
})


def _term(node: Node, ctx: int) -> str:
    kind = node.kind
    if kind is Kind.NUM:
        text = format_number(node.payload)
        return _paren(text, node.payload < 0 and ctx > _NEG)
    if kind in (Kind.VAR, Kind.PARAM, Kind.SYM):
        return node.payload
    if kind is Kind.TIME:
        return "time"
    if kind is Kind.NEXT:
        return f"next({_term(node.args[0], 0)})"
    if kind is Kind.PREV:
        return f"prev({_term(node.args[0], 0)})"
    if kind is Kind.ITE:
        cond, then, other = node.args
        return f"ite({_formula(cond, 0)}, {_term(then, 0)}, {_term(other, 0)})"
    if kind in _EF_SUFFIX:
        suffix = _EF_SUFFIX[kind]
        if kind in (Kind.AT_NEXT_ITER, Kind.AT_LAST_ITER):
            suffix += f"^{node.payload}"
        text = f"{_term(node.args[0], _POSTFIX)}{suffix}({_formula(node.args[1], 0)})"
        return _paren(text, ctx > _POSTFIX)
    if kind is Kind.APPLY:
        op = node.payload
        if op in ("+", "-"):
            text = f"{_term(node.args[0], _SUM)} {op} {_term(node.args[1], _PRODUCT)}"
            return _paren(text, ctx > _SUM)
        if op == "*":
            text = f"{_term(node.args[0], _PRODUCT)} * {_term(node.args[1], _NEG)}"
            return _paren(text, ctx > _PRODUCT)
        if op == "neg":
            return _paren(f"-{_term(node.args[0], _NEG)}", ctx > _NEG)
        if not node.args:
            return f"{op}()"
        return f"{op}({', '.join(_term(a, 0) for a in node.args)})"
    return _formula(node, _ATOM)
