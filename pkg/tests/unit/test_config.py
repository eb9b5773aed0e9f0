"""
Unit tests for config.py
"""

import os

import pytest
import yaml

from src.parity_bench.config import Config
from src.parity_bench.errors import ConfigurationError


class TestConfig:
    """Unit tests for the Config class."""

    def test_reference_defaults(self):
        """Test that defaults describe the reference sweep."""
        config = Config()
        assert config.N == 12
        assert len(config.BETAS) == 20
        assert config.BETAS[0] == 0.1 and config.BETAS[-1] == 2.0
        assert config.SEEDS == tuple(range(111, 121))
        assert (config.SIGMA, config.K) == (1.0, 512)
        assert config.BUDGETS == (1000, 2000, 5000)
        assert config.M == 200
        assert config.TAU == 0.1

    def test_grid_defaults(self):
        """Test the band grid and the n-sweep cover every reference value."""
        config = Config()
        assert config.SIZES == tuple(range(10, 21))
        assert 15 in config.SIZES
        assert config.SIGMAS == (0.5, 1.0, 2.0, 3.0)
        assert config.KS == (128, 256, 512)
        assert config.ABLATION_BETA == config.NSWEEP_BETA == 0.9

    def test_out_dir_from_environment(self, mocker):
        """Test PARITY_BENCH_OUT_DIR overrides the output location."""
        mocker.patch.dict(os.environ, {"PARITY_BENCH_OUT_DIR": "/tmp/bench"})
        config = Config()
        assert config.OUT_DIR == "/tmp/bench"
        assert config.store_path == os.path.join("/tmp/bench", "records.jsonl")

    def test_update_casts_and_skips_none(self):
        """Test scalar and list overrides."""
        config = Config().update({
            "n": "10", "betas": [0.5, "1.5"], "seeds": 7, "steps": None,
        })
        assert config.N == 10
        assert config.BETAS == (0.5, 1.5)
        assert config.SEEDS == (7,)
        assert config.STEPS == Config.STEPS

    def test_update_does_not_touch_class_defaults(self):
        """Test instance overrides leave the defaults alone."""
        Config().update({"n": 6})
        assert Config.N == 12

    def test_update_uppercase_keys(self):
        """Test that file keys may be upper case."""
        assert Config().update({"K": 128}).K == 128

    def test_unknown_key(self):
        """Test an unknown setting."""
        with pytest.raises(ConfigurationError):
            Config().update({"bogus": 1})

    def test_bad_value(self):
        """Test a value that cannot be cast."""
        with pytest.raises(ConfigurationError):
            Config().update({"n": "twelve"})

    def test_from_file(self, temp_directory):
        """Test loading a YAML override file."""
        path = os.path.join(temp_directory, "bench.yml")
        with open(path, "w", encoding="utf-8") as f:
            yaml.safe_dump(
                {"betas": [0.9], "seeds": [111, 112], "workers": 2,
                 "log_level": "DEBUG"},
                f,
            )
        config = Config.from_file(path)
        assert config.BETAS == (0.9,)
        assert config.SEEDS == (111, 112)
        assert config.WORKERS == 2
        assert config.LOG_LEVEL == "DEBUG"

    def test_from_file_must_be_mapping(self, temp_directory):
        """Test a YAML list is rejected."""
        path = os.path.join(temp_directory, "bench.yml")
        with open(path, "w", encoding="utf-8") as f:
            f.write("- 1\n- 2\n")
        with pytest.raises(ConfigurationError):
            Config.from_file(path)

    def test_missing_file(self, temp_directory):
        """Test an unreadable config path."""
        with pytest.raises(ConfigurationError):
            Config.from_file(os.path.join(temp_directory, "missing.yml"))

    def test_repr(self):
        """Test the debugging representation."""
        text = repr(Config())
        assert "Band: sigma=1.0 K=512" in text
        assert "Workers: 1" in text
