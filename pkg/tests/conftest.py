"""Global pytest configuration and fixtures.

This module contains shared fixtures and configuration for all tests
in the project.
"""

import os
import shutil
import tempfile
from typing import Generator

import numpy as np
import pytest

ACCEPTANCE = os.getenv("PARITY_BENCH_ACCEPTANCE") == "1"


# Register custom markers to avoid warnings
def pytest_configure(config):
    """Configure pytest with custom markers."""
    config.addinivalue_line("markers", "unit: Unit tests")
    config.addinivalue_line("markers", "integration: Integration tests")
    config.addinivalue_line("markers", "slow: Slow running tests")
    config.addinivalue_line("markers", "skip_coverage: Skip coverage for this test")


def pytest_collection_modifyitems(config, items):
    """Add markers by location and gate slow tests behind the environment."""
    skip_slow = pytest.mark.skip(reason="set PARITY_BENCH_ACCEPTANCE=1 to run")
    for item in items:
        # Add unit marker to tests in unit directory
        if "unit" in str(item.fspath):
            item.add_marker(pytest.mark.unit)

        # Add integration marker to tests in integration directory
        if "integration" in str(item.fspath):
            item.add_marker(pytest.mark.integration)

        if "slow" in item.keywords and not ACCEPTANCE:
            item.add_marker(skip_slow)


@pytest.fixture
def temp_directory() -> Generator[str, None, None]:
    """Fixture that provides a temporary directory for tests."""
    temp_dir = tempfile.mkdtemp()
    yield temp_dir

    # Cleanup
    shutil.rmtree(temp_dir)


@pytest.fixture
def rng():
    """Seeded generator for test data."""
    return np.random.default_rng(20240611)


@pytest.fixture
def small_config():
    """Instance small enough for exhaustive checks; its unseen elite is nonempty."""
    from src.parity_bench.benchmark import BenchmarkConfig

    return BenchmarkConfig(n=8, beta=0.9, seed=111, m=20, sigma=1.0, K=32, tau=0.2)


@pytest.fixture
def small_instance(small_config):
    """Fixture that builds the small instance."""
    from src.parity_bench.benchmark import make_instance

    return make_instance(small_config)


@pytest.fixture
def quick_settings():
    """Run settings with a short optimisation schedule."""
    from src.parity_bench.harness.runner import RunSettings
    from src.parity_bench.trainer import OptimizerConfig

    return RunSettings(
        optimizer=OptimizerConfig(steps=15),
        budgets=(10, 100, 1000),
    )
