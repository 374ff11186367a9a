"""Helper models and plants for identification and compensation testing."""

import logging
from typing import Dict, List, Sequence, Tuple

import numpy as np

from PyNarxHysteresis.config import ExperimentConfig
from PyNarxHysteresis.narx import NarxModel, Signal, free_run
from PyNarxHysteresis.terms import parse_term

_LOGGER = logging.getLogger(__name__)

# Benchmark direct model, constrained estimate
TABLE_DIRECT: Tuple[Tuple[str, float], ...] = (
    ("y(k-1)", 1.00),
    ("phi1(k-1)", 0.77),
    ("u(k-2)*phi1(k-2)*phi2(k-2)", 1.44e-2),
    ("y(k-1)*phi1(k-2)*phi2(k-2)", -9.60e-3),
    ("u(k-2)^2*phi1(k-2)", 3.15e-4),
    ("y(k-1)*u(k-2)*phi1(k-2)", -2.47e-4),
)

# Benchmark inverse model, constrained estimate
TABLE_INVERSE: Tuple[Tuple[str, float], ...] = (
    ("y(k-1)", 1.00),
    ("phi1(k-1)", 1.27),
    ("y(k-1)*phi1(k-1)*phi2(k-1)", -2.13e-2),
    ("u(k-1)*phi1(k-1)*phi2(k-1)", 1.37e-2),
    ("y(k-1)*u(k-1)*phi2(k-1)", -1.07e-5),
    ("u(k-1)^2*phi2(k-1)", 7.99e-6),
)

# Models identified on the laboratory actuator
BENCH_DIRECT: Tuple[Tuple[str, float], ...] = (
    ("y(k-1)", 1.0),
    ("phi1(k-2)", -19.76),
    ("phi1(k-1)", 19.32),
    ("u(k-2)*phi1(k-2)*phi2(k-2)", 9.44),
    ("y(k-1)*phi1(k-2)*phi2(k-2)", -12.61),
)

BENCH_INVERSE: Tuple[Tuple[str, float], ...] = (
    ("y(k-1)", 1.0),
    ("phi1(k-1)", 86.67),
    ("phi1(k-2)", -85.02),
    ("u(k-2)*phi1(k-1)", -0.98),
    ("u(k-2)*phi1(k-2)*phi2(k-2)", 1.72),
    ("y(k-1)*phi1(k-2)*phi2(k-2)", -1.13),
)


def model_from_labels(
    pairs: Sequence[Tuple[str, float]],
    n_y: int = 1,
    n_u: int = 2,
    tau_d: int = 1,
    tau_s: int = 0,
    sample_time: float | None = 0.001,
) -> NarxModel:
    """Build a model from (label, theta) pairs."""
    return NarxModel(
        terms=tuple(parse_term(label) for label, _ in pairs),
        theta=np.array([value for _, value in pairs], dtype=float),
        n_y=n_y,
        n_u=n_u,
        tau_d=tau_d,
        tau_s=tau_s,
        sample_time=sample_time,
    )


def fixed_structures() -> Dict[str, List[str]]:
    """Benchmark direct and inverse structures keyed by config section."""
    return {
        "identification": [label for label, _ in TABLE_DIRECT],
        "inverse": [label for label, _ in TABLE_INVERSE],
    }


def with_fixed_structures(config: ExperimentConfig) -> ExperimentConfig:
    """Copy of a config that estimates the benchmark structures instead of selecting."""
    structures = fixed_structures()
    return config.model_copy(
        update={
            section: getattr(config, section).model_copy(update={"structure": labels})
            for section, labels in structures.items()
        }
    )


def random_direct_model(rng: np.random.Generator) -> NarxModel:
    """Assumption-compliant direct model whose law recursion stays bounded."""
    pairs = (
        ("y(k-1)", rng.uniform(0.3, 0.9)),
        ("u(k-1)", rng.uniform(0.5, 1.5)),
        ("u(k-2)", rng.uniform(-0.3, 0.3)),
        ("u(k-2)*phi1(k-2)*phi2(k-2)", rng.uniform(-0.01, 0.01)),
        ("y(k-1)*phi1(k-2)*phi2(k-2)", rng.uniform(-0.01, 0.01)),
    )
    return model_from_labels(pairs)


def random_inverse_model(rng: np.random.Generator, tau_s: int = 2) -> NarxModel:
    pairs = (
        ("y(k-1)", rng.uniform(0.3, 0.9)),
        ("u(k-1)", rng.uniform(0.5, 1.5)),
        ("phi1(k-1)", rng.uniform(-0.5, 0.5)),
        ("u(k-2)*phi1(k-1)", rng.uniform(-0.01, 0.01)),
        ("y(k-1)*phi1(k-2)*phi2(k-2)", rng.uniform(-0.01, 0.01)),
    )
    return model_from_labels(pairs, tau_s=tau_s)


def sine_reference(n: int = 600, amplitude: float = 1.0, period: int = 200) -> Signal:
    k = np.arange(n, dtype=float)
    return Signal(amplitude * np.sin(2.0 * np.pi * k / period), 0.001)


class EchoPlant:
    """Plant whose output equals its input."""

    def respond(self, u: Signal) -> Signal:
        return u


class NarxPlant:
    """Plant simulated by free-running a NARX model from rest."""

    def __init__(self, model: NarxModel):
        self.model = model

    def respond(self, u: Signal) -> Signal:
        return free_run(self.model, u, np.zeros(self.model.n_y))
