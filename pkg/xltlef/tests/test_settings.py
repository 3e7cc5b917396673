"""Tests for the settings loader"""

import os
import sys
from unittest.mock import patch

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


class TestSettings:
    """YAML settings, environment and command-line overrides"""

    def test_shipped_settings_match_defaults(self):
        from core.settings import RunConfig, load_settings

        with patch.dict(os.environ, {}, clear=False):
            os.environ.pop("XLTLEF_SOLVER_CMD", None)
            config = load_settings()
        assert config == RunConfig()

    def test_partial_file(self, tmp_path):
        from core.settings import load_settings

        path = tmp_path / "settings.yaml"
        path.write_text("engine:\n  mode: bmc\n  k_max: 7\nsuite:\n  seed: 3\n")
        config = load_settings(path)
        assert config.mode == "bmc"
        assert config.k_max == 7
        assert config.seed == 3
        assert config.n_max == 4

    def test_env_overrides_solver_command(self, tmp_path):
        from core.settings import load_settings

        path = tmp_path / "settings.yaml"
        path.write_text("solver:\n  command: z3 -in\n")
        with patch.dict(os.environ, {"XLTLEF_SOLVER_CMD": "cvc5 --incremental"}):
            config = load_settings(path)
        assert config.solver_argv() == ["cvc5", "--incremental"]

    def test_timeout_placeholder(self):
        from core.settings import RunConfig

        assert RunConfig(timeout_s=2).solver_argv() == ["z3", "-in", "-smt2", "-t:2000"]
        assert RunConfig(timeout_s=0).solver_argv() == ["z3", "-in", "-smt2"]

    def test_overrides_skip_none(self):
        from core.settings import RunConfig

        base = RunConfig()
        config = base.with_overrides(mode="kind", k_max=None)
        assert config.mode == "kind"
        assert config.k_max == base.k_max
        assert base.mode == "auto"

    @pytest.mark.parametrize("overrides", [
        {"mode": "magic"},
        {"output_format": "xml"},
        {"time_model": "continuous"},
        {"k_max": 0},
        {"timeout_s": -1},
    ])
    def test_invalid_values(self, overrides):
        from core.errors import ConfigError
        from core.settings import RunConfig

        with pytest.raises(ConfigError):
            RunConfig().with_overrides(**overrides)

    def test_missing_explicit_file(self, tmp_path):
        from core.errors import ConfigError
        from core.settings import load_settings

        with pytest.raises(ConfigError):
            load_settings(tmp_path / "absent.yaml")

    def test_malformed_file(self, tmp_path):
        from core.errors import ConfigError
        from core.settings import load_settings

        path = tmp_path / "settings.yaml"
        path.write_text("- just\n- a list\n")
        with pytest.raises(ConfigError):
            load_settings(path)
        path.write_text("engine:\n  k_max: lots\n")
        with pytest.raises(ConfigError):
            load_settings(path)

    def test_global_settings(self):
        from core import settings
        from core.settings import RunConfig, get_settings, set_settings

        previous = settings._settings
        try:
            custom = RunConfig(seed=99)
            set_settings(custom)
            assert get_settings() is custom
        finally:
            settings._settings = previous
