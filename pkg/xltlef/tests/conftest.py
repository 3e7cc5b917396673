"""Shared fixtures for the xltlef test suite"""

import os
import shutil
import sys
from pathlib import Path

import pytest

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

PROBLEMS_DIR = Path(__file__).parent.parent / "problems"


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running solver checks")


def _solver_installed() -> bool:
    from core.settings import load_settings

    argv = load_settings().solver_argv()
    return bool(argv) and shutil.which(argv[0]) is not None


@pytest.fixture
def problems_dir() -> Path:
    return PROBLEMS_DIR


@pytest.fixture
def solver_config():
    """Settings for tests that start a solver; skips when none is installed."""
    if not _solver_installed():
        pytest.skip("SMT solver not available")
    from core.settings import load_settings

    return load_settings().with_overrides(timeout_s=30, k_max=12, n_max=3, bmc_sat_k_max=12)


@pytest.fixture
def sig():
    """b, c : bool; x, y : real; p : real."""
    from oracle.generators import suite_signature

    return suite_signature()
