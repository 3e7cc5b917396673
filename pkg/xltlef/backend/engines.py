"""Engines - registry of decision procedures for fair transition systems

An engine answers one question about an FTS: does it have a fair path?
"sat" comes with a lasso, "unsat" with a proof certificate, "unknown"
with a reason.

    bmc        lasso search up to bmc_sat_k_max states
    kind       k-induction on "never accept" (counter bound 1)
    kliveness  k-liveness with counter bounds up to n_max
    auto       bmc and kliveness in parallel, first conclusive answer wins

INVARIANTS:
1. Engines never share a solver session
2. The loser of a race is cancelled and its solver processes are stopped
3. Registering two engines under one name raises ValueError
"""

import logging
import threading
from abc import ABC, abstractmethod
from concurrent.futures import FIRST_COMPLETED, ThreadPoolExecutor, wait
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from backend.bmc import Lasso, check_sat_bmc
from backend.fts import FTS
from backend.kinduction import Certificate, prove_no_fair_path
from backend.solver import SolverSession
from core.errors import CancelledError, SolverError
from core.settings import RunConfig

SAT, UNSAT, UNKNOWN = "sat", "unsat", "unknown"


@dataclass
class EngineContext:
    """FTS, settings and the solver sessions an engine run opened."""
    fts: FTS
    config: RunConfig
    cancel: threading.Event = field(default_factory=threading.Event)
    label: str = "engine"
    sessions: List[SolverSession] = field(default_factory=list)

    def session(self, name: str) -> SolverSession:
        if self.cancel.is_set():
            raise CancelledError(f"{self.label} cancelled")
        session = SolverSession(self.config, name=f"{self.label}:{name}")
        self.sessions.append(session)
        return session

    def stop(self) -> None:
        self.cancel.set()
        for session in self.sessions:
            session.close()


@dataclass
class EngineResult:
    kind: str                                   # sat | unsat | unknown
    engine: str
    lasso: Optional[Lasso] = None
    certificate: Optional[Certificate] = None
    bound: int = 0
    reason: str = ""
    bounds_tried: List[Tuple[int, int]] = field(default_factory=list)

    @property
    def conclusive(self) -> bool:
        return self.kind != UNKNOWN


class Engine(ABC):
    """Base class for all engines"""

    @property
    @abstractmethod
    def name(self) -> str:
        """Engine name (must be unique)"""
        raise NotImplementedError

    @property
    @abstractmethod
    def description(self) -> str:
        raise NotImplementedError

    @property
    def can_prove(self) -> bool:
        """Can this engine answer unsat?"""
        return False

    @property
    def can_refute(self) -> bool:
        """Can this engine answer sat?"""
        return False

    @abstractmethod
    def run(self, context: EngineContext) -> EngineResult:
        raise NotImplementedError

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "description": self.description,
                "can_prove": self.can_prove, "can_refute": self.can_refute}


# ============================================================================
# ENGINES
# ============================================================================

class BmcEngine(Engine):
    name = "bmc"
    description = "Bounded search for a fair lasso"
    can_refute = True

    def run(self, context: EngineContext) -> EngineResult:
        k_max = context.config.bmc_sat_k_max
        with context.session("lasso") as session:
            result = check_sat_bmc(context.fts, k_max, session, context.cancel)
        if result.found:
            return EngineResult(SAT, self.name, lasso=result.lasso, bound=result.bound)
        return EngineResult(UNKNOWN, self.name, bound=k_max, reason=result.reason,
                            bounds_tried=[(0, k) for k in range(1, k_max + 1)])


class KInductionEngine(Engine):
    name = "kind"
    description = "k-induction on the absence of any accepting step"
    can_prove = True

    def counter_bound(self, config: RunConfig) -> int:
        return 1

    def run(self, context: EngineContext) -> EngineResult:
        config = context.config
        proof = prove_no_fair_path(context.fts, context.session, self.counter_bound(config),
                                   config.k_max, context.cancel)
        if proof.proved:
            return EngineResult(UNSAT, self.name, certificate=proof.certificate,
                                bound=proof.certificate.depth, bounds_tried=proof.bounds_tried)
        return EngineResult(UNKNOWN, self.name, bound=config.k_max, reason=proof.reason,
                            bounds_tried=proof.bounds_tried)


class KLivenessEngine(KInductionEngine):
    name = "kliveness"
    description = "k-liveness counter with k-induction and Houdini lemmas"

    def counter_bound(self, config: RunConfig) -> int:
        return config.n_max


class AutoEngine(Engine):
    name = "auto"
    description = "Lasso search and k-liveness raced in parallel"
    can_prove = True
    can_refute = True

    def __init__(self, contenders: Tuple[str, ...] = ("bmc", "kliveness")):
        self.contenders = contenders

    def run(self, context: EngineContext) -> EngineResult:
        registry = get_registry()
        engines = [registry.get(name) for name in self.contenders]
        contexts = [EngineContext(context.fts, context.config, threading.Event(), label=e.name)
                    for e in engines]
        results: List[EngineResult] = []
        winner: Optional[EngineResult] = None
        with ThreadPoolExecutor(max_workers=len(engines), thread_name_prefix="engine") as pool:
            pending = {pool.submit(_guarded, e, c): e.name for e, c in zip(engines, contexts)}
            while pending and winner is None:
                done, _ = wait(pending, return_when=FIRST_COMPLETED)
                for future in done:
                    del pending[future]
                    result = future.result()
                    results.append(result)
                    if result.conclusive and winner is None:
                        winner = result
            if winner is not None:
                for c in contexts:
                    if c.label != winner.engine:
                        c.stop()
                logging.info(f"auto: {winner.engine} answered {winner.kind}")
        if winner is not None:
            return winner
        reason = "; ".join(f"{r.engine}: {r.reason}" for r in results)
        tried = [b for r in results for b in r.bounds_tried]
        return EngineResult(UNKNOWN, self.name, bound=max((r.bound for r in results), default=0),
                            reason=reason, bounds_tried=tried)


def _guarded(engine: Engine, context: EngineContext) -> EngineResult:
    try:
        return engine.run(context)
    except CancelledError:
        return EngineResult(UNKNOWN, engine.name, reason="cancelled")
    except SolverError:
        if context.cancel.is_set():
            return EngineResult(UNKNOWN, engine.name, reason="cancelled")
        raise
    finally:
        for session in context.sessions:
            session.close()


# ============================================================================
# REGISTRY
# ============================================================================

class EngineRegistry:
    """Central registry for all engines"""

    def __init__(self):
        self._engines: Dict[str, Engine] = {}

    def register(self, engine: Engine):
        """Register an engine"""
        if not isinstance(engine, Engine):
            raise TypeError("Engine must inherit from Engine base class")
        if engine.name in self._engines:
            raise ValueError(f"Engine '{engine.name}' is already registered")
        self._engines[engine.name] = engine

    def get(self, name: str) -> Optional[Engine]:
        return self._engines.get(name)

    def has(self, name: str) -> bool:
        return name in self._engines

    def list_all(self) -> Dict[str, Dict[str, Any]]:
        return {name: engine.to_dict() for name, engine in self._engines.items()}


# Global registry instance
_registry: Optional[EngineRegistry] = None


def get_registry() -> EngineRegistry:
    """Get global engine registry, with the built-in engines registered"""
    global _registry
    if _registry is None:
        _registry = EngineRegistry()
        for engine in (BmcEngine(), KInductionEngine(), KLivenessEngine(), AutoEngine()):
            _registry.register(engine)
    return _registry


def run_engine(name: str, fts: FTS, config: RunConfig) -> EngineResult:
    engine = get_registry().get(name)
    if engine is None:
        raise ValueError(f"Unknown engine '{name}'")
    context = EngineContext(fts, config, label=name)
    try:
        return _guarded(engine, context)
    finally:
        context.stop()
