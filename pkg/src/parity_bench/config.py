"""
Centralized configuration for the benchmark.

Defaults describe the reference experiment. A YAML file can override
them, and command-line flags override the file.
"""

import os

import yaml

from .errors import ConfigurationError


def _default_betas():
    return tuple(round(0.1 * i, 1) for i in range(1, 21))


class Config:

    # Output location, overridable with PARITY_BENCH_OUT_DIR
    OUT_DIR = "results"

    # Benchmark instance
    N = 12
    BETAS = _default_betas()
    SEEDS = tuple(range(111, 121))
    M = 200
    TAU = 0.1

    # Parity band
    SIGMA = 1.0
    K = 512

    # Band ablation grid
    SIGMAS = (0.5, 1.0, 2.0, 3.0)
    KS = (128, 256, 512)
    ABLATION_BETA = 0.9

    # System-size sweep
    SIZES = tuple(range(10, 21))
    NSWEEP_BETA = 0.9

    # Optimisation
    LEARNING_RATE = 0.05
    STEPS = 600
    BETA1 = 0.9
    BETA2 = 0.999
    EPSILON = 1e-8
    INIT_SCALE = 0.1

    # Evaluation
    BUDGETS = (1000, 2000, 5000)

    # Models and workers
    MODELS = (
        "iqp-parity",
        "iqp-mse",
        "ising-sparse",
        "ising-dense",
        "maxent",
        "spectral-proxy",
        "spectral-proxy-support",
        "uniform",
        "uniform-support",
    )
    WORKERS = 1

    # Logging Configuration
    LOG_LEVEL = "INFO"

    _TUPLE_KEYS = {
        "betas": float,
        "seeds": int,
        "sigmas": float,
        "ks": int,
        "sizes": int,
        "budgets": int,
        "models": str,
    }
    _SCALAR_KEYS = {
        "out_dir": str,
        "n": int,
        "m": int,
        "tau": float,
        "sigma": float,
        "k": int,
        "ablation_beta": float,
        "nsweep_beta": float,
        "learning_rate": float,
        "steps": int,
        "beta1": float,
        "beta2": float,
        "epsilon": float,
        "init_scale": float,
        "workers": int,
        "log_level": str,
    }

    @classmethod
    def keys(cls):
        """Lower-case names accepted by update."""
        return set(cls._TUPLE_KEYS) | set(cls._SCALAR_KEYS)

    def __init__(self):
        self.OUT_DIR = os.getenv("PARITY_BENCH_OUT_DIR", Config.OUT_DIR)

    def update(self, values):
        """Override settings from a mapping of lower-case keys.

        Keys whose value is None are skipped, so argparse namespaces with
        unset flags can be passed straight through.

        Raises:
            ConfigurationError: On an unknown key or a value of the wrong type.
        """
        for key, value in values.items():
            if value is None:
                continue
            name = key.lower()
            try:
                if name in self._TUPLE_KEYS:
                    if isinstance(value, (str, int, float)):
                        value = [value]
                    cast = self._TUPLE_KEYS[name]
                    setattr(self, name.upper(), tuple(cast(v) for v in value))
                elif name in self._SCALAR_KEYS:
                    setattr(self, name.upper(), self._SCALAR_KEYS[name](value))
                else:
                    raise ConfigurationError(f"unknown setting '{key}'")
            except (TypeError, ValueError) as e:
                if isinstance(e, ConfigurationError):
                    raise
                raise ConfigurationError(
                    f"invalid value for '{key}': {value!r}"
                ) from e
        return self

    @classmethod
    def from_file(cls, path):
        """Load a YAML file on top of the defaults."""
        try:
            with open(path, "r", encoding="utf-8") as f:
                values = yaml.safe_load(f) or {}
        except (OSError, yaml.YAMLError) as e:
            raise ConfigurationError(f"cannot read config {path}: {e}") from e
        if not isinstance(values, dict):
            raise ConfigurationError(f"config {path} must be a mapping")
        return cls().update(values)

    @property
    def store_path(self):
        return os.path.join(self.OUT_DIR, "records.jsonl")

    def __repr__(self):
        """String representation for debugging."""
        return (
            f"Config(\n"
            f"  Output: {self.OUT_DIR}\n"
            f"  Instance: n={self.N} m={self.M} tau={self.TAU} "
            f"betas={len(self.BETAS)} seeds={len(self.SEEDS)}\n"
            f"  Band: sigma={self.SIGMA} K={self.K}\n"
            f"  Adam: lr={self.LEARNING_RATE} steps={self.STEPS}\n"
            f"  Workers: {self.WORKERS}\n"
            f")"
        )
