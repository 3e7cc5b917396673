"""Errors - one hierarchy for every failure the checker can report

INVARIANTS:
1. Every error raised by the library derives from XltlefError
2. Parse and sort errors carry positioned diagnostics, never bare strings
3. Solver crashes surface as SolverError only after a restart was attempted
"""

from dataclasses import dataclass, asdict
from typing import Any, Dict, List, Optional


@dataclass(frozen=True)
class Diagnostic:
    """A positioned message about the input text."""
    line: int
    column: int
    message: str
    severity: str = "error"   # error | warning

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class XltlefError(Exception):
    """Base class for all library errors."""


class ConfigError(XltlefError):
    """Malformed settings file or unknown setting value."""


class ParseError(XltlefError):
    """Syntax error in a problem file or formula text."""

    def __init__(self, diagnostics: List[Diagnostic], source: str = "<input>"):
        self.diagnostics = list(diagnostics)
        self.source = source
        super().__init__("\n".join(f"{source}:{d}" for d in self.diagnostics))


class SortError(ParseError):
    """Sort or well-formedness violation, reported with every position found."""


class StageError(XltlefError):
    """A transformation received input outside its stage fragment."""


class EncodingError(XltlefError):
    """Metric operator outside the encodable fragment for the chosen time model."""


class ClockNormalizationError(XltlefError):
    """Time-valued term that cannot be rewritten over clocks."""


class SolverError(XltlefError):
    """SMT solver failed twice on the same request."""

    def __init__(self, message: str, transcript: Optional[List[str]] = None):
        self.transcript = list(transcript or [])
        tail = "\n".join(self.transcript[-10:])
        super().__init__(f"{message}\n{tail}" if tail else message)


class TraceError(XltlefError):
    """Malformed trace or a trace that cannot be evaluated."""


class BoundOverflowError(XltlefError):
    """Brute-force enumeration would exceed its candidate cap."""


class WitnessError(XltlefError):
    """Back-mapped witness does not replay on the original formula."""


class CancelledError(XltlefError):
    """An engine was stopped because another engine already answered."""
