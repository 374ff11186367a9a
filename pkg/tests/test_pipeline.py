"""Tests for the identification, compensation and sweep pipelines on short records."""

import logging
import math
from typing import Tuple

import numpy as np
import pytest

from PyNarxHysteresis.config import ExperimentConfig
from PyNarxHysteresis.exceptions import ConfigError
from PyNarxHysteresis.narx import NarxModel, Signal
from PyNarxHysteresis.pipeline import (
    compensate,
    default_transient_skip,
    excitation_signal,
    identify,
    sweep_beta,
    sweep_sampling,
    synthesize,
    validate_model,
)
from PyNarxHysteresis.types import CompensationStrategy, LawKind, SteadyStateClass

_LOGGER = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Tests
# ---------------------------------------------------------------------------


def test_excitation_metadata(short_config: ExperimentConfig) -> None:
    """Excitation is recorded with its seed and generator."""
    u, metadata = excitation_signal(short_config, duration=2.0)

    assert metadata["seed"] == short_config.simulation.seed
    assert metadata["generator"] == "numpy.random.PCG64/standard_normal"
    assert metadata["n_samples"] == len(u) == 2000
    assert np.max(np.abs(u.samples)) == pytest.approx(70.0)


def test_identify_fixed_structure(
    short_config: ExperimentConfig, short_training: Tuple[Signal, Signal]
) -> None:
    """The configured structure is estimated under the continuum constraint."""
    _LOGGER.info("=== Testing Fixed-Structure Identification ===")

    u, y = short_training
    result = identify(short_config, u, y)

    assert result.report is None
    assert len(result.model.terms) == 6
    assert result.model.theta[0] == pytest.approx(1.0, abs=1e-10)
    assert result.steady_state.classification is SteadyStateClass.CONTINUUM
    summary = result.summary()
    assert summary["inverse"] is False
    _LOGGER.info("%s", summary["model"])


def test_identify_unconstrained(
    short_config: ExperimentConfig, short_training: Tuple[Signal, Signal]
) -> None:
    u, y = short_training
    result = identify(short_config, u, y, constrain=False)

    assert result.model.theta[0] != 1.0


def test_identify_with_selection(
    short_config: ExperimentConfig, short_training: Tuple[Signal, Signal]
) -> None:
    """Without a fixed structure the pool is ranked and AIC picks the size."""
    _LOGGER.info("=== Testing Identification With Selection ===")

    config = short_config.model_copy(
        update={
            "identification": short_config.identification.model_copy(
                update={"structure": None, "max_terms": 6}
            )
        }
    )
    u, y = short_training
    result = identify(config, u, y)

    assert result.report is not None
    assert result.report.chosen_size is not None
    assert 1 <= len(result.model.terms) == result.report.chosen_size <= 6
    assert result.report.cumulative_err[-1] > 0.9
    _LOGGER.info("Selected: %s", [t.label for t in result.model.terms])


def test_identify_inverse(
    short_config: ExperimentConfig, short_training: Tuple[Signal, Signal]
) -> None:
    """Inverse identification keeps the causality shift on the model."""
    u, y = short_training
    result = identify(short_config, u, y, inverse=True)

    assert result.model.tau_s == 2
    assert result.summary()["inverse"] is True
    assert result.steady_state.classification is SteadyStateClass.CONTINUUM

    law = synthesize(result.model)
    assert law.kind is LawKind.INVERSE


def test_validate_direct_model(
    short_config: ExperimentConfig,
    short_training: Tuple[Signal, Signal],
    validation_set: Tuple[Signal, Signal],
) -> None:
    """The identified model free-runs close to the validation response."""
    u, y = short_training
    model = identify(short_config, u, y).model
    u_val, y_val = validation_set

    target, simulated, error = validate_model(model, u_val, y_val, transient_skip=1000)

    _LOGGER.info("Validation MAPE %.4f %%", error)
    assert len(target) == len(simulated)
    assert error < 5.0


def test_synthesize_strategies(table_direct_model: NarxModel) -> None:
    assert synthesize(table_direct_model).kind is LawKind.DIRECT
    with pytest.raises(ConfigError):
        synthesize(table_direct_model, CompensationStrategy.NONE)


def test_compensation_beats_baseline(
    short_config: ExperimentConfig, table_direct_model: NarxModel
) -> None:
    """The direct law tracks the reference better than the bare plant."""
    _LOGGER.info("=== Testing Compensation Against Baseline ===")

    chain = compensate(short_config, synthesize(table_direct_model), with_baseline=True)

    assert chain.baseline is not None
    _LOGGER.info(
        "Compensated MAPE %.4f %% (NSAVI %.3f), baseline %.4f %%",
        chain.mape,
        chain.nsavi,
        chain.baseline["mape"],
    )
    assert chain.mape < chain.baseline["mape"]
    assert chain.metrics["transient_skip"] == 1000


def test_default_transient_skip(short_config: ExperimentConfig) -> None:
    """One period when it fits, otherwise nothing."""
    assert default_transient_skip(short_config, 1.0, 0.001, 3000) == 1000
    assert default_transient_skip(short_config, 1.0, 0.001, 500) == 0


def test_sweep_sampling_rows(short_config: ExperimentConfig) -> None:
    """Each sampling time yields a row; invalid times fail before any run."""
    rows = sweep_sampling(short_config, [0.002])

    assert len(rows) == 1
    assert rows[0]["sample_time"] == 0.002
    assert set(rows[0]) == {"sample_time", "model_mape", "tracking_mape"}

    with pytest.raises(ConfigError):
        sweep_sampling(short_config, [0.0015])


def test_sweep_beta_records(short_config: ExperimentConfig) -> None:
    config = short_config.model_copy(
        update={
            "sweep": short_config.sweep.model_copy(
                update={"beta_start": 0.004, "beta_stop": 0.008, "beta_step": 0.002}
            )
        }
    )

    records = sweep_beta(config)

    assert [r["beta"] for r in records] == [0.004, 0.006, 0.008]
    assert all(not r["diverged"] for r in records)
