"""Settings Loader - runtime configuration for checks and self-tests

Loads config/settings.yaml (or a file given with --config), applies the
XLTLEF_SOLVER_CMD environment override and then command-line overrides.

INVARIANTS:
1. Unknown engine modes, time models or output formats raise ConfigError
2. A missing settings file falls back to built-in defaults
3. RunConfig is immutable once built; overrides produce a new instance
"""

import logging
import os
import shlex
from dataclasses import dataclass, asdict, replace
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml

from core.errors import ConfigError

DEFAULT_SETTINGS_PATH = Path(__file__).parent.parent / "config" / "settings.yaml"

ENGINE_MODES = ("auto", "bmc", "kind", "kliveness")
OUTPUT_FORMATS = ("text", "json")
SOLVER_CMD_ENV = "XLTLEF_SOLVER_CMD"


@dataclass(frozen=True)
class RunConfig:
    """Everything a check or a self-test run needs to know."""
    solver_command: str = "z3 -in -smt2 -t:{timeout_ms}"
    solver_logic: str = "auto"
    timeout_s: float = 60.0
    mode: str = "auto"
    k_max: int = 20
    n_max: int = 4
    bmc_sat_k_max: int = 40
    seed: int = 42
    cases: int = 500
    max_depth: int = 6
    workers: int = 1
    output_format: str = "text"
    witness_dir: Optional[str] = None
    pedantic: bool = False
    time_model: Optional[str] = None   # overrides the problem file when set

    def solver_argv(self) -> List[str]:
        """Solver command split into argv with the timeout placeholder filled."""
        timeout_ms = int(self.timeout_s * 1000) if self.timeout_s else 0
        command = self.solver_command
        if "{timeout_ms}" in command and not timeout_ms:
            command = " ".join(tok for tok in shlex.split(command) if "{timeout_ms}" not in tok)
        return shlex.split(command.replace("{timeout_ms}", str(timeout_ms)))

    def with_overrides(self, **overrides: Any) -> "RunConfig":
        """New config with every non-None override applied."""
        changes = {k: v for k, v in overrides.items() if v is not None}
        config = replace(self, **changes)
        _validate(config)
        return config

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _validate(config: RunConfig) -> None:
    if config.mode not in ENGINE_MODES:
        raise ConfigError(f"Unknown engine mode '{config.mode}' (expected one of {', '.join(ENGINE_MODES)})")
    if config.output_format not in OUTPUT_FORMATS:
        raise ConfigError(f"Unknown output format '{config.output_format}'")
    if config.time_model is not None and config.time_model not in ("discrete", "dense", "super_dense"):
        raise ConfigError(f"Unknown time model '{config.time_model}'")
    for name in ("k_max", "n_max", "bmc_sat_k_max", "cases", "workers", "max_depth"):
        if getattr(config, name) < 1:
            raise ConfigError(f"Setting '{name}' must be positive")
    if config.timeout_s < 0:
        raise ConfigError("Setting 'timeout_s' must not be negative")


def load_settings(path: Optional[Path] = None) -> RunConfig:
    """Load settings from YAML, falling back to defaults."""
    config_path = Path(path) if path else DEFAULT_SETTINGS_PATH
    data: Dict[str, Any] = {}
    if config_path.exists():
        try:
            with open(config_path, 'r') as f:
                data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"Error loading settings from {config_path}: {e}")
        if not isinstance(data, dict):
            raise ConfigError(f"Settings file {config_path} must contain a mapping")
    elif path is not None:
        raise ConfigError(f"Settings file not found: {config_path}")
    else:
        logging.warning(f"Settings file {config_path} missing, using defaults")

    solver = data.get("solver") or {}
    engine = data.get("engine") or {}
    suite = data.get("suite") or {}
    output = data.get("output") or {}
    try:
        config = RunConfig(
            solver_command=str(solver.get("command", RunConfig.solver_command)),
            solver_logic=str(solver.get("logic", RunConfig.solver_logic)),
            timeout_s=float(solver.get("timeout_s", RunConfig.timeout_s)),
            mode=str(engine.get("mode", RunConfig.mode)),
            k_max=int(engine.get("k_max", RunConfig.k_max)),
            n_max=int(engine.get("n_max", RunConfig.n_max)),
            bmc_sat_k_max=int(engine.get("bmc_sat_k_max", RunConfig.bmc_sat_k_max)),
            seed=int(suite.get("seed", RunConfig.seed)),
            cases=int(suite.get("cases", RunConfig.cases)),
            max_depth=int(suite.get("max_depth", RunConfig.max_depth)),
            workers=int(suite.get("workers", RunConfig.workers)),
            output_format=str(output.get("format", RunConfig.output_format)),
            witness_dir=output.get("witness_dir"),
        )
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Bad value in {config_path}: {e}")

    env_command = os.environ.get(SOLVER_CMD_ENV)
    if env_command:
        config = replace(config, solver_command=env_command)
        logging.info(f"Solver command taken from {SOLVER_CMD_ENV}")

    _validate(config)
    logging.info(f"Settings loaded from {config_path if config_path.exists() else 'defaults'}")
    return config


# Global settings instance
_settings: Optional[RunConfig] = None


def get_settings() -> RunConfig:
    """Get global settings, loading them on first use"""
    global _settings
    if _settings is None:
        _settings = load_settings()
    return _settings


def set_settings(config: RunConfig) -> None:
    """Replace global settings (used by the CLI after --config)"""
    global _settings
    _settings = config
