"""Solver Session - one incremental SMT-LIB solver process

Wraps pysmt's SmtLibSolver over the configured command (z3 by default).
Every session owns a private pysmt Environment, and every walker the
session runs (simplifier, free variables, types, reply parser) is the one
of that environment. Two sessions therefore share no mutable pysmt state
and may be driven from different threads; one session is used by one
thread at a time.

INVARIANTS:
1. Each declaration and assertion is recorded with its push level, so a
   process that died can be restarted and brought back to the same state
2. A reply the wrapper cannot read while the process is still alive fails
   the session for good: SolverError now and on every later request
3. "unknown" from the solver (timeouts included) is reported as None, never as an error
"""

import io
import logging
import subprocess
import threading
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, Iterator, List, Optional, Tuple

from pysmt.decorators import clear_pending_pop
from pysmt.environment import Environment
from pysmt.exceptions import PysmtException, SolverReturnedUnknownResultError, UnknownSolverAnswerError
from pysmt.fnode import FNode
from pysmt.logics import QF_UFLIRA, convert_logic_from_string
from pysmt.smtlib import commands as smtcmd
from pysmt.smtlib.parser import SmtLibParser
from pysmt.smtlib.script import SmtLibCommand
from pysmt.smtlib.solver import SmtLibSolver

from backend.smt import py_value
from core.errors import CancelledError, SolverError
from core.settings import RunConfig, get_settings

TRANSCRIPT_LIMIT = 500


def _sorts_of(symbol: FNode) -> List[Any]:
    tp = symbol.symbol_type()
    if tp.is_function_type():
        return [tp.return_type, *tp.param_types]
    return [tp]


class _PipeSolver(SmtLibSolver):
    """SmtLibSolver bound to its own environment, with explicit declarations and batched get-value."""

    def __init__(self, args: List[str], environment: Environment, logic):
        super().__init__(args, environment, logic, LOGICS=[logic])
        self.parser = SmtLibParser(environment=environment, interactive=True)

    @clear_pending_pop
    def add_assertion(self, formula, named=None):
        env = self.environment
        formula = env.simplifier.simplify(formula)
        for sort in self.to.get_types(formula, custom_only=True):
            self._need_sort(sort)
        self.declare(env.fvo.get_free_variables(formula))
        self._send_silent_command(SmtLibCommand(smtcmd.ASSERT, [formula]))

    def _need_sort(self, sort) -> None:
        if all(sort not in level for level in self.declared_sorts):
            self._declare_sort(sort)

    def declare(self, symbols: Iterable[FNode]) -> None:
        for symbol in symbols:
            if any(symbol in level for level in self.declared_vars):
                continue
            for sort in _sorts_of(symbol):
                if sort.is_custom_type():
                    self._need_sort(sort)
            self._declare_variable(symbol)

    def get_values(self, terms: List[FNode]) -> List[FNode]:
        self._send_command(SmtLibCommand(smtcmd.GET_VALUE, list(terms)))
        answer = self._get_value_answer()
        # the reply parser stops at the closing parenthesis
        rest = self.solver_stdout.readline().strip()
        if rest:
            raise UnknownSolverAnswerError(f"Solver returned: '{rest}'")
        if len(answer) != len(terms):
            raise UnknownSolverAnswerError(f"{len(answer)} values for {len(terms)} terms")
        return [value for _, value in answer]

    def alive(self) -> bool:
        try:
            self.solver.wait(timeout=0.2)
        except subprocess.TimeoutExpired:
            return True
        return False


class SolverSession:
    """Incremental solver with push/pop, model queries and crash recovery."""

    def __init__(self, config: Optional[RunConfig] = None, name: str = "main"):
        self.config = config or get_settings()
        self.name = name
        self.env = Environment()
        self.mgr = self.env.formula_manager
        self.logic = (QF_UFLIRA if self.config.solver_logic == "auto"
                      else convert_logic_from_string(self.config.solver_logic))
        self.argv = self.config.solver_argv()
        self.transcript: List[str] = []
        self.restarts = 0
        self._frames: List[List[Tuple[str, Any]]] = [[]]
        self._closed = False
        self._failed: Optional[str] = None
        self._lock = threading.RLock()
        self._solver = self._start()

    # -- process handling ---------------------------------------------------

    def _start(self) -> _PipeSolver:
        try:
            solver = _PipeSolver(self.argv, self.env, self.logic)
        except (OSError, PysmtException) as e:
            raise SolverError(f"cannot start solver {' '.join(self.argv)}: {e}", self.transcript)
        logging.debug(f"[{self.name}] solver started: {' '.join(self.argv)}")
        return solver

    def _record(self, line: str) -> None:
        self.transcript.append(line)
        if len(self.transcript) > TRANSCRIPT_LIMIT:
            del self.transcript[:len(self.transcript) - TRANSCRIPT_LIMIT]

    def _restart(self) -> None:
        self.restarts += 1
        logging.warning(f"[{self.name}] solver process died, restarting")
        try:
            self._solver.solver.kill()
        except Exception:
            pass
        self._solver = self._start()
        for depth, frame in enumerate(self._frames):
            if depth > 0:
                self._solver.push()
            for what, item in frame:
                if what == "declare":
                    self._solver.declare(item)
                else:
                    self._solver.add_assertion(item)

    def _fail(self, what: str, error: Exception) -> SolverError:
        self._failed = what
        self._record(f"; failure on {what}: {error}")
        return SolverError(f"[{self.name}] solver failed on {what}: {error}", self.transcript)

    def _call(self, what: str, action: Callable[[], Any]) -> Any:
        with self._lock:
            if self._closed:
                raise CancelledError(f"[{self.name}] session closed")
            if self._failed is not None:
                raise SolverError(f"[{self.name}] session unusable after a failed {self._failed}",
                                  self.transcript)
            try:
                return action()
            except SolverReturnedUnknownResultError:
                raise
            except (OSError, ValueError, PysmtException) as e:
                if self._closed:
                    raise CancelledError(f"[{self.name}] session closed")
                # a live process with an unreadable reply is out of sync
                if self.restarts >= 1 or self._solver.alive():
                    raise self._fail(what, e)
                self._record(f"; process died on {what}: {e}")
                try:
                    self._restart()
                except (OSError, ValueError, PysmtException) as restart_error:
                    raise self._fail("restart", restart_error)
            try:
                return action()
            except SolverReturnedUnknownResultError:
                raise
            except (OSError, ValueError, PysmtException) as e:
                raise self._fail(what, e)

    # -- public API ---------------------------------------------------------

    def declare(self, symbols: Iterable[FNode]) -> None:
        """Declare symbols in the current scope without asserting anything about them."""
        symbols = list(symbols)
        self._record(f"; declare {' '.join(s.symbol_name() for s in symbols)}")
        self._call("declare", lambda: self._solver.declare(symbols))
        self._frames[-1].append(("declare", symbols))

    def add_assertion(self, formula: FNode) -> None:
        self._record(f"(assert {formula.to_smtlib(daggify=True)})")
        self._call("assert", lambda: self._solver.add_assertion(formula))
        self._frames[-1].append(("assert", formula))

    def push(self) -> None:
        self._record("(push 1)")
        self._call("push", lambda: self._solver.push())
        self._frames.append([])

    def pop(self) -> None:
        if len(self._frames) == 1:
            raise SolverError("pop without a matching push", self.transcript)
        self._record("(pop 1)")
        self._call("pop", lambda: self._solver.pop())
        self._frames.pop()

    @contextmanager
    def scope(self) -> Iterator["SolverSession"]:
        """push on entry, pop on exit; a closed or failed session is left as it is."""
        self.push()
        try:
            yield self
        finally:
            if not self._closed and self._failed is None:
                self.pop()

    @property
    def level(self) -> int:
        return len(self._frames) - 1

    def check(self, assumptions: Optional[List[FNode]] = None) -> Optional[bool]:
        """True for sat, False for unsat, None when the solver answers unknown."""
        self._record("(check-sat)")
        try:
            result = self._call("check-sat", lambda: self._solver.solve(assumptions))
        except SolverReturnedUnknownResultError:
            self._record("; unknown")
            return None
        self._record(f"; {'sat' if result else 'unsat'}")
        return bool(result)

    def get_values(self, terms: Iterable[FNode]) -> List[FNode]:
        """Model values of terms, in order, from one get-value request."""
        terms = list(terms)
        if not terms:
            return []
        self._record(f"(get-value ({' '.join(t.to_smtlib(daggify=False) for t in terms)}))")
        return self._call("get-value", lambda: self._solver.get_values(terms))

    def get_py_values(self, terms: Iterable[FNode]) -> List[Any]:
        return [py_value(v) for v in self.get_values(terms)]

    def get_value(self, term: FNode) -> FNode:
        return self.get_values([term])[0]

    def get_py_value(self, term: FNode) -> Any:
        return py_value(self.get_value(term))

    def close(self) -> None:
        """Stop the solver process; pending and later requests raise CancelledError."""
        if self._closed:
            return
        self._closed = True
        idle = self._lock.acquire(blocking=False)
        try:
            if idle and self._failed is None:
                self._solver.exit()
            else:
                # a query is running in another thread, or the pipe is out of sync
                self._solver.solver.kill()
        except Exception:
            pass
        finally:
            if idle:
                self._lock.release()
        logging.debug(f"[{self.name}] solver closed")

    def __enter__(self) -> "SolverSession":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


# ============================================================================
# RAW SMT-LIB SCRIPTS
# ============================================================================

@dataclass
class SolveResult:
    status: str                                   # sat | unsat | unknown
    model: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {"status": self.status, "model": {k: str(v) for k, v in self.model.items()}}


_IGNORED = {smtcmd.SET_LOGIC, smtcmd.SET_OPTION, smtcmd.SET_INFO, smtcmd.EXIT,
            smtcmd.DECLARE_SORT, smtcmd.GET_MODEL}


def solve(session: SolverSession, script: str) -> SolveResult:
    """Run an SMT-LIB script on the session and report the last check-sat answer.

    The model lists the get-value terms of the script or, without any,
    every declared constant.
    """
    parsed = SmtLibParser(environment=session.env).get_script(io.StringIO(script))
    constants: Dict[str, FNode] = {}
    requested: List[FNode] = []
    status: Optional[bool] = None
    checked = False
    for cmd in parsed.commands:
        if cmd.name in (smtcmd.DECLARE_FUN, smtcmd.DECLARE_CONST):
            symbol = cmd.args[0]
            session.declare([symbol])
            if not symbol.symbol_type().is_function_type():
                constants[symbol.symbol_name()] = symbol
        elif cmd.name == smtcmd.ASSERT:
            session.add_assertion(cmd.args[0])
        elif cmd.name == smtcmd.PUSH:
            for _ in range(int(cmd.args[0]) if cmd.args else 1):
                session.push()
        elif cmd.name == smtcmd.POP:
            for _ in range(int(cmd.args[0]) if cmd.args else 1):
                session.pop()
        elif cmd.name == smtcmd.CHECK_SAT:
            status = session.check()
            checked = True
        elif cmd.name == smtcmd.GET_VALUE:
            requested.extend(cmd.args)
        elif cmd.name not in _IGNORED:
            logging.warning(f"solve: ignoring unsupported command {cmd.name}")
    if not checked:
        status = session.check()

    if status is None:
        return SolveResult("unknown")
    if not status:
        return SolveResult("unsat")
    terms = requested or list(constants.values())
    values = session.get_py_values(terms)
    model = {(t.symbol_name() if t.is_symbol() else t.to_smtlib(daggify=False)): v
             for t, v in zip(terms, values)}
    return SolveResult("sat", model)
