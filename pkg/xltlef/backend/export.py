"""Export - fair transition systems as text for external model checkers

File layout, one item per line, every item terminated by ';':

    -- xltlef fts 1
    SORT      name;
    VAR       name : sort;
    PARAM     name : sort;
    FUN       name : (sort, ...) -> sort;
    SAMPLING  iota = name; delta = name; zeta = name;
    DRIFT     name : time | clock;
    INIT      formula;
    TRANS     formula over current and next(...) values;
    FAIRNESS  formula;            (one per justice condition)
    STABLE    atom [name=rate, ...];

Formulas use problem-file syntax. The absolute time variable is written as
an ordinary real variable (`now` unless taken), listed under DRIFT as time.

INVARIANTS:
1. Output is deterministic: sections in fixed order, symbols sorted by name
2. read_fts(export(f)) exports to the same text
3. Every justice condition appears exactly once under FAIRNESS
"""

import logging
import re
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from backend.clocks import TIME_NAME
from backend.fts import DRIFT_CLOCK, DRIFT_TIME, FTS
from core import logic as L
from core.discretize import SamplingVars
from core.errors import Diagnostic, ParseError
from core.logic import Kind, Node, Signature, Sort
from core.parser import parse_formula
from core.printer import pretty

HEADER = "-- xltlef fts 1"
SECTIONS = ("SORT", "VAR", "PARAM", "FUN", "SAMPLING", "DRIFT", "INIT", "TRANS", "FAIRNESS", "STABLE")
TIME_ALIAS = "now"


class _TimeAsVar(L.Rewriter):

    def __init__(self, name: str):
        super().__init__()
        self.name = name

    def rewrite(self, node: Node, args: Tuple[Node, ...]) -> Node:
        if node.kind is Kind.TIME:
            return L.var(self.name, L.REAL)
        return L.rebuild(node, args)


def _time_alias(fts: FTS) -> str:
    if TIME_ALIAS not in fts.state_vars and not fts.signature.declared(TIME_ALIAS):
        return TIME_ALIAS
    return fts.signature.copy().fresh_name(TIME_ALIAS)


def _rate(value: Fraction) -> str:
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def export(fts: FTS, fmt: str = "xltlef") -> str:
    """Text of the FTS in the format above."""
    if fmt != "xltlef":
        raise ValueError(f"Unknown export format '{fmt}'")
    keeps_time = TIME_NAME in fts.state_vars
    alias = _time_alias(fts) if keeps_time else TIME_NAME
    plain = _TimeAsVar(alias)

    def name_of(v: str) -> str:
        return alias if v == TIME_NAME else v

    def text(node: Node) -> str:
        return pretty(plain(node))

    lines = [HEADER]
    sorts = sorted({str(s) for s in list(fts.state_vars.values()) + list(fts.params.values())
                    + [a for f in fts.functions.values() for a in f.arg_sorts]
                    + [f.result for f in fts.functions.values()]
                    if s.kind is L.SortKind.UNINTERPRETED})
    lines += ["SORT"] + [f"  {s};" for s in sorts]
    lines += ["VAR"] + [f"  {name_of(v)} : {fts.state_vars[v]};" for v in sorted(fts.state_vars, key=name_of)]
    lines += ["PARAM"] + [f"  {p} : {fts.params[p]};" for p in sorted(fts.params)]
    lines += ["FUN"]
    for name in sorted(fts.functions):
        decl = fts.functions[name]
        lines.append(f"  {name} : ({', '.join(str(a) for a in decl.arg_sorts)}) -> {decl.result};")
    sampling = fts.sampling
    lines += ["SAMPLING"]
    for key in ("iota", "delta", "zeta"):
        value = getattr(sampling, key)
        if value is not None:
            lines.append(f"  {key} = {value};")
    lines += ["DRIFT"] + [f"  {name_of(v)} : {fts.drift[v]};" for v in sorted(fts.drift, key=name_of)]
    lines += ["INIT", f"  {text(fts.init)};"]
    lines += ["TRANS", f"  {text(fts.trans)};"]
    lines += ["FAIRNESS"] + [f"  {text(j)};" for j in fts.justice]
    lines += ["STABLE"]
    for atom, rates in fts.stable_atoms:
        listed = ", ".join(f"{name_of(n)}={_rate(r)}" for n, r in sorted(rates.items(), key=lambda kv: name_of(kv[0])))
        lines.append(f"  {text(atom)} [{listed}];")
    logging.info(f"Exported FTS: {fts.summary()}")
    return "\n".join(lines) + "\n"


def write_export(fts: FTS, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(export(fts), encoding="utf-8")
    return path


# ============================================================================
# READER
# ============================================================================

_DECL = re.compile(r"^(\w+)\s*:\s*(.+)$")
_FUN = re.compile(r"^(\w+)\s*:\s*\(([^)]*)\)\s*->\s*(\w+)$")
_ASSIGN = re.compile(r"^(\w+)\s*=\s*(\w+)$")
_STABLE = re.compile(r"^(.*)\[([^\]]*)\]$")


def _items(text: str, source: str) -> Dict[str, List[Tuple[int, str]]]:
    lines = text.splitlines()
    if not lines or lines[0].strip() != HEADER:
        raise ParseError([Diagnostic(1, 1, f"expected header '{HEADER}'")], source)
    items: Dict[str, List[Tuple[int, str]]] = {s: [] for s in SECTIONS}
    section: Optional[str] = None
    for number, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("--"):
            continue
        if line in SECTIONS:
            section = line
            continue
        if section is None or not line.endswith(";"):
            raise ParseError([Diagnostic(number, 1, "expected a section name or an item ending in ';'")], source)
        items[section].extend((number, part.strip()) for part in line[:-1].split(";") if part.strip())
    return items


def read_fts(text: str, source: str = "<fts>") -> FTS:
    """FTS from export text; raises ParseError on malformed input."""
    items = _items(text, source)
    errors: List[Diagnostic] = []
    sig = Signature()

    def fail(line: int, message: str) -> None:
        errors.append(Diagnostic(line, 1, message))

    def sort_of(line: int, name: str) -> Sort:
        sort = sig.sort_named(name.strip())
        if sort is None:
            fail(line, f"unknown sort '{name.strip()}'")
            return L.REAL
        return sort

    for line, item in items["SORT"]:
        try:
            sig.declare_sort(item)
        except ValueError as e:
            fail(line, str(e))
    for section, declare in (("VAR", sig.declare_var), ("PARAM", sig.declare_param)):
        for line, item in items[section]:
            m = _DECL.match(item)
            if m is None:
                fail(line, f"malformed {section} declaration")
                continue
            try:
                declare(m.group(1), sort_of(line, m.group(2)))
            except ValueError as e:
                fail(line, str(e))
    for line, item in items["FUN"]:
        m = _FUN.match(item)
        if m is None:
            fail(line, "malformed FUN declaration")
            continue
        args = [sort_of(line, a) for a in m.group(2).split(",") if a.strip()]
        sig.declare_function(m.group(1), args, sort_of(line, m.group(3)))

    sampling_names: Dict[str, str] = {}
    for line, item in items["SAMPLING"]:
        m = _ASSIGN.match(item)
        if m is None or m.group(1) not in ("iota", "delta", "zeta"):
            fail(line, "malformed SAMPLING entry")
            continue
        sampling_names[m.group(1)] = m.group(2)
    drift: Dict[str, str] = {}
    for line, item in items["DRIFT"]:
        m = _DECL.match(item)
        if m is None or m.group(2) not in (DRIFT_TIME, DRIFT_CLOCK):
            fail(line, "malformed DRIFT entry")
            continue
        drift[m.group(1)] = m.group(2)
    if errors:
        raise ParseError(errors, source)

    def formula(line: int, item: str, allow_next: bool = False) -> Node:
        try:
            return parse_formula(item, sig, allow_next=allow_next, source=f"{source}:{line}")
        except ParseError as e:
            raise type(e)([Diagnostic(line, d.column, d.message) for d in e.diagnostics], source)

    init = L.conj([formula(line, item) for line, item in items["INIT"]])
    trans = L.conj([formula(line, item, allow_next=True) for line, item in items["TRANS"]])
    justice = [formula(line, item) for line, item in items["FAIRNESS"]]
    stable: List[Tuple[Node, Dict[str, Fraction]]] = []
    for line, item in items["STABLE"]:
        m = _STABLE.match(item)
        if m is None:
            raise ParseError([Diagnostic(line, 1, "malformed STABLE entry")], source)
        rates = {}
        for pair in m.group(2).split(","):
            if pair.strip():
                name, value = pair.split("=")
                rates[name.strip()] = Fraction(value.strip())
        stable.append((formula(line, m.group(1).strip()), rates))

    fts = FTS(sig, dict(sig.state_vars), dict(sig.params), dict(sig.functions), init, trans,
              justice, drift, stable,
              sampling=SamplingVars(sampling_names.get("iota"), sampling_names.get("delta"),
                                    sampling_names.get("zeta")))
    logging.info(f"Read FTS from {source}: {fts.summary()}")
    return fts


def read_fts_file(path: Union[str, Path]) -> FTS:
    return read_fts(Path(path).read_text(encoding="utf-8"), str(path))
