"""Traces - discrete lassos, interval lassos and their JSON form

A DiscreteLassoTrace is a finite list of states whose suffix from
loop_start repeats forever; every repetition adds `shift` to the
timestamps. An IntervalTrace does the same for a sequence of singular
and open intervals.

INVARIANTS:
1. Timestamps are exact rationals and non-decreasing, across the loop seam too
2. Missing variable, parameter and function values read as 0 / false
3. to_dict / from_dict round-trip losslessly (rationals are written as strings)
"""

import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from core.errors import TraceError
from core.logic import TimeModel

Value = Union[bool, Fraction]

TRACE_FORMAT = "xltlef-trace"
SCHEMA_VERSION = 1


# ============================================================================
# VALUES
# ============================================================================

def to_value(raw: Any) -> Value:
    if isinstance(raw, bool):
        return raw
    if isinstance(raw, (int, Fraction)):
        return Fraction(raw)
    if isinstance(raw, str):
        try:
            return Fraction(raw)
        except (ValueError, ZeroDivisionError):
            raise TraceError(f"'{raw}' is not a rational value")
    if isinstance(raw, float):
        return Fraction(raw).limit_denominator(10 ** 9)
    raise TraceError(f"unsupported value {raw!r}")


def value_to_json(value: Value) -> Any:
    if isinstance(value, bool):
        return value
    value = Fraction(value)
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def _assignment(raw: Dict[str, Any]) -> Dict[str, Value]:
    return {name: to_value(v) for name, v in raw.items()}


def _functions(raw: Dict[str, Any]) -> Dict[str, Dict[Tuple[Value, ...], Value]]:
    tables: Dict[str, Dict[Tuple[Value, ...], Value]] = {}
    for name, rows in raw.items():
        table = {}
        for row in rows:
            table[tuple(to_value(a) for a in row["args"])] = to_value(row["value"])
        tables[name] = table
    return tables


def _functions_to_json(tables: Dict[str, Dict[Tuple[Value, ...], Value]]) -> Dict[str, Any]:
    return {name: [{"args": [value_to_json(a) for a in args], "value": value_to_json(v)}
                   for args, v in table.items()]
            for name, table in sorted(tables.items())}


def _json_assignment(assignment: Dict[str, Value]) -> Dict[str, Any]:
    return {name: value_to_json(v) for name, v in sorted(assignment.items())}


# ============================================================================
# DISCRETE LASSOS
# ============================================================================

@dataclass
class DiscreteLassoTrace:
    """states[0..n-1] with states[loop_start..n-1] repeating forever."""
    states: List[Dict[str, Value]]
    loop_start: int = 0
    timestamps: Optional[List[Fraction]] = None
    params: Dict[str, Value] = field(default_factory=dict)
    functions: Dict[str, Dict[Tuple[Value, ...], Value]] = field(default_factory=dict)
    shift: Optional[Fraction] = None
    allow_zeno: bool = False

    def __post_init__(self):
        n = len(self.states)
        if n == 0:
            raise TraceError("a lasso needs at least one state")
        if not 0 <= self.loop_start < n:
            raise TraceError(f"loop_start {self.loop_start} outside 0..{n - 1}")
        if self.timestamps is None:
            self.timestamps = [Fraction(i) for i in range(n)]
        self.timestamps = [Fraction(t) for t in self.timestamps]
        if len(self.timestamps) != n:
            raise TraceError(f"{len(self.timestamps)} timestamps for {n} states")
        if self.timestamps[0] != 0:
            raise TraceError("the first timestamp must be 0")
        for a, b in zip(self.timestamps, self.timestamps[1:]):
            if b < a:
                raise TraceError("timestamps must be non-decreasing")
        span = self.timestamps[-1] - self.timestamps[self.loop_start]
        if self.shift is None:
            self.shift = span + 1
        self.shift = Fraction(self.shift)
        if self.shift < span:
            raise TraceError(f"shift {self.shift} is smaller than the loop span {span}")
        if self.shift <= 0 and not self.allow_zeno:
            raise TraceError("time does not advance over the loop")

    def __len__(self) -> int:
        return len(self.states)

    @property
    def loop_length(self) -> int:
        return len(self.states) - self.loop_start

    def index(self, i: int) -> int:
        """State index of unrolled position i."""
        if i < len(self.states):
            return i
        return self.loop_start + (i - self.loop_start) % self.loop_length

    def time(self, i: int) -> Fraction:
        if i < len(self.states):
            return self.timestamps[i]
        rounds = (i - self.loop_start) // self.loop_length
        return self.timestamps[self.index(i)] + rounds * self.shift

    def value(self, i: int, name: str) -> Value:
        return self.states[self.index(i)].get(name, Fraction(0))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "format": TRACE_FORMAT,
            "schema_version": SCHEMA_VERSION,
            "kind": "discrete",
            "loop_start": self.loop_start,
            "shift": value_to_json(self.shift),
            "timestamps": [value_to_json(t) for t in self.timestamps],
            "states": [_json_assignment(s) for s in self.states],
            "params": _json_assignment(self.params),
            "functions": _functions_to_json(self.functions),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DiscreteLassoTrace":
        _check_header(data, "discrete")
        return cls(
            states=[_assignment(s) for s in data["states"]],
            loop_start=int(data.get("loop_start", 0)),
            timestamps=[to_value(t) for t in data["timestamps"]] if "timestamps" in data else None,
            params=_assignment(data.get("params", {})),
            functions=_functions(data.get("functions", {})),
            shift=to_value(data["shift"]) if data.get("shift") is not None else None,
        )


# ============================================================================
# INTERVAL LASSOS
# ============================================================================

class SegmentKind(Enum):
    POINT = "point"
    OPEN = "open"


@dataclass(frozen=True)
class IntervalEntry:
    """A singular interval [lo, lo] or an open interval (lo, hi) with its state."""
    kind: SegmentKind
    lo: Fraction
    hi: Fraction
    state: Dict[str, Value] = field(default_factory=dict, hash=False)

    @classmethod
    def point(cls, t: Any, state: Optional[Dict[str, Value]] = None) -> "IntervalEntry":
        t = Fraction(t)
        return cls(SegmentKind.POINT, t, t, dict(state or {}))

    @classmethod
    def open(cls, lo: Any, hi: Any, state: Optional[Dict[str, Value]] = None) -> "IntervalEntry":
        return cls(SegmentKind.OPEN, Fraction(lo), Fraction(hi), dict(state or {}))

    @property
    def is_point(self) -> bool:
        return self.kind is SegmentKind.POINT


@dataclass
class IntervalTrace:
    """Intervals covering [0, inf) once entries[loop_start:] repeat shifted by `shift`."""
    entries: List[IntervalEntry]
    loop_start: int
    shift: Fraction
    params: Dict[str, Value] = field(default_factory=dict)
    functions: Dict[str, Dict[Tuple[Value, ...], Value]] = field(default_factory=dict)
    time_model: TimeModel = TimeModel.DENSE

    def __post_init__(self):
        self.shift = Fraction(self.shift)
        n = len(self.entries)
        if n == 0:
            raise TraceError("an interval trace needs at least one entry")
        if not 0 <= self.loop_start < n:
            raise TraceError(f"loop_start {self.loop_start} outside 0..{n - 1}")
        first = self.entries[0]
        if not first.is_point or first.lo != 0:
            raise TraceError("an interval trace starts with the singular interval [0, 0]")
        if not self.entries[self.loop_start].is_point:
            raise TraceError("the loop must start at a singular interval")
        if self.shift <= 0:
            raise TraceError("time does not advance over the loop")
        for i in range(n):
            self._check_adjacent(self.entry(i), self.entry(i + 1), i)

    def _check_adjacent(self, a: IntervalEntry, b: IntervalEntry, i: int) -> None:
        if a.is_point and a.lo != a.hi:
            raise TraceError(f"entry {i}: singular interval with distinct endpoints")
        if not a.is_point and not a.lo < a.hi:
            raise TraceError(f"entry {i}: empty open interval")
        if a.is_point and b.is_point:
            if self.time_model is TimeModel.DENSE:
                raise TraceError(f"entry {i}: two singular intervals in a row need super-dense time")
            if self.time_model is TimeModel.SUPER_DENSE and b.lo != a.lo:
                raise TraceError(f"entry {i}: gap between singular intervals")
            if b.lo < a.lo:
                raise TraceError(f"entry {i}: time decreases")
        elif a.is_point:
            if self.time_model is TimeModel.DISCRETE:
                raise TraceError(f"entry {i}: open interval in a discrete trace")
            if b.lo != a.lo:
                raise TraceError(f"entry {i}: open interval does not start at the previous point")
        elif not b.is_point or a.hi != b.lo:
            raise TraceError(f"entry {i}: open interval is not closed by the next point")

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def loop_length(self) -> int:
        return len(self.entries) - self.loop_start

    def index(self, i: int) -> int:
        if i < len(self.entries):
            return i
        return self.loop_start + (i - self.loop_start) % self.loop_length

    def offset(self, i: int) -> Fraction:
        if i < len(self.entries):
            return Fraction(0)
        return ((i - self.loop_start) // self.loop_length) * self.shift

    def entry(self, i: int) -> IntervalEntry:
        """Unrolled entry i with shifted endpoints."""
        base = self.entries[self.index(i)]
        delta = self.offset(i)
        if not delta:
            return base
        return IntervalEntry(base.kind, base.lo + delta, base.hi + delta, base.state)

    def locate(self, t: Fraction) -> int:
        """First unrolled entry containing time t."""
        t = Fraction(t)
        if t < 0:
            raise TraceError(f"time {t} precedes the trace")
        i = 0
        while True:
            e = self.entry(i)
            if e.is_point and e.lo == t:
                return i
            if not e.is_point and e.lo < t < e.hi:
                return i
            if e.lo > t:
                raise TraceError(f"time {t} is not covered")
            i += 1

    def to_dict(self) -> Dict[str, Any]:
        return {
            "format": TRACE_FORMAT,
            "schema_version": SCHEMA_VERSION,
            "kind": "interval",
            "time_model": self.time_model.value,
            "loop_start": self.loop_start,
            "shift": value_to_json(self.shift),
            "entries": [{"kind": e.kind.value, "lo": value_to_json(e.lo), "hi": value_to_json(e.hi),
                         "state": _json_assignment(e.state)} for e in self.entries],
            "params": _json_assignment(self.params),
            "functions": _functions_to_json(self.functions),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "IntervalTrace":
        _check_header(data, "interval")
        entries = [IntervalEntry(SegmentKind(e["kind"]), to_value(e["lo"]), to_value(e["hi"]),
                                 _assignment(e.get("state", {})))
                   for e in data["entries"]]
        return cls(entries, int(data["loop_start"]), to_value(data["shift"]),
                   _assignment(data.get("params", {})), _functions(data.get("functions", {})),
                   TimeModel.from_name(data.get("time_model", "dense")))


Trace = Union[DiscreteLassoTrace, IntervalTrace]


# ============================================================================
# JSON FILES
# ============================================================================

def _check_header(data: Dict[str, Any], kind: str) -> None:
    if data.get("format", TRACE_FORMAT) != TRACE_FORMAT:
        raise TraceError(f"not an {TRACE_FORMAT} file")
    version = data.get("schema_version", SCHEMA_VERSION)
    if version > SCHEMA_VERSION:
        raise TraceError(f"trace schema version {version} is newer than {SCHEMA_VERSION}")
    if data.get("kind", kind) != kind:
        raise TraceError(f"expected a {kind} trace, found {data.get('kind')}")


def trace_from_dict(data: Dict[str, Any]) -> Trace:
    try:
        if data.get("kind", "discrete") == "interval":
            return IntervalTrace.from_dict(data)
        return DiscreteLassoTrace.from_dict(data)
    except (KeyError, TypeError, ValueError) as e:
        raise TraceError(f"malformed trace: {e}")


def load_trace(path: Union[str, Path]) -> Trace:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise TraceError(f"cannot read trace {path}: {e}")
    if "trace" in data and isinstance(data["trace"], dict):
        data = data["trace"]
    return trace_from_dict(data)


def dump_trace(trace: Trace, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(trace.to_dict(), indent=2) + "\n", encoding="utf-8")
