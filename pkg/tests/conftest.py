"""Pytest configuration and fixtures for identification and compensation testing."""

import logging
from typing import Tuple

import numpy as np
import pytest

from PyNarxHysteresis.config import ExperimentConfig, load_experiment_config
from PyNarxHysteresis.narx import NarxModel, Signal
from PyNarxHysteresis.pipeline import training_data, validation_data

from .helpers import (
    BENCH_DIRECT,
    BENCH_INVERSE,
    TABLE_DIRECT,
    TABLE_INVERSE,
    model_from_labels,
    with_fixed_structures,
)

_LOGGER = logging.getLogger(__name__)

SHORT_TRAINING = 10.0  # s
SHORT_SIGNAL = 3.0  # s


def pytest_addoption(parser: pytest.Parser) -> None:
    """Register custom CLI options for the benchmark runs."""
    group = parser.getgroup("narx", "NARX hysteresis benchmark options")
    group.addoption(
        "--benchmark-duration",
        type=float,
        default=50.0,
        help="Training record length in seconds for slow benchmark tests (default: 50)",
    )


@pytest.fixture(scope="session")
def benchmark_duration(request: pytest.FixtureRequest) -> float:
    return float(request.config.getoption("--benchmark-duration"))


@pytest.fixture(scope="session")
def benchmark_config() -> ExperimentConfig:
    """Shipped benchmark configuration."""
    return load_experiment_config()


@pytest.fixture(scope="session")
def fixed_config(benchmark_config: ExperimentConfig) -> ExperimentConfig:
    """Benchmark configuration estimating the benchmark structures."""
    return with_fixed_structures(benchmark_config)


@pytest.fixture(scope="session")
def short_config(fixed_config: ExperimentConfig) -> ExperimentConfig:
    """Fixed-structure configuration with short records for fast tests."""
    return fixed_config.model_copy(
        update={
            "simulation": fixed_config.simulation.model_copy(
                update={"duration": SHORT_TRAINING}
            ),
            "validation": fixed_config.validation.model_copy(
                update={"duration": SHORT_SIGNAL}
            ),
            "compensation": fixed_config.compensation.model_copy(
                update={"duration": SHORT_SIGNAL}
            ),
        }
    )


@pytest.fixture(scope="session")
def short_training(short_config: ExperimentConfig) -> Tuple[Signal, Signal]:
    """Bouc-Wen response to the filtered-noise excitation."""
    u, y, _ = training_data(short_config)
    _LOGGER.info("Short training record: %d sample(s)", len(u))
    return u, y


@pytest.fixture(scope="session")
def validation_set(short_config: ExperimentConfig) -> Tuple[Signal, Signal]:
    """Bouc-Wen response to the validation sinusoid."""
    u, y, _ = validation_data(short_config)
    return u, y


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def table_direct_model() -> NarxModel:
    return model_from_labels(TABLE_DIRECT)


@pytest.fixture(scope="session")
def table_inverse_model() -> NarxModel:
    return model_from_labels(TABLE_INVERSE, n_u=1, tau_s=2)


@pytest.fixture(scope="session")
def bench_direct_model() -> NarxModel:
    return model_from_labels(BENCH_DIRECT)


@pytest.fixture(scope="session")
def bench_inverse_model() -> NarxModel:
    return model_from_labels(BENCH_INVERSE, tau_s=2)
