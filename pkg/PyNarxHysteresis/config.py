"""Experiment configuration"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .const import (
    BETA_SWEEP_START,
    BETA_SWEEP_STEP,
    BETA_SWEEP_STOP,
    DEFAULT_A,
    DEFAULT_BETA,
    DEFAULT_CUTOFF_HZ,
    DEFAULT_D_P,
    DEFAULT_DT,
    DEFAULT_EXCITATION_AMPLITUDE,
    DEFAULT_FILTER_ORDER,
    DEFAULT_GAMMA,
    DEFAULT_REFERENCE_AMPLITUDE,
    DEFAULT_SAMPLE_TIME,
    DEFAULT_SIGNAL_FREQ_HZ,
    DEFAULT_SWEEP_SAMPLE_TIMES,
    DEFAULT_TRAINING_DURATION,
    DEFAULT_VALIDATION_AMPLITUDE,
    TOL_SAMPLING_JITTER,
)
from .exceptions import ConfigError, NarxHysteresisError
from .plant import BoucWenParams, SimConfig
from .terms import FULL_EXCLUSIONS, Term, parse_term
from .types import CompensationStrategy, ExclusionRule

_LOGGER = logging.getLogger(__name__)

BENCHMARK_CONFIG_FILE = "benchmark.json"


def default_config_path() -> Path:
    """Shipped benchmark configuration."""
    return Path(__file__).parent / "data" / BENCHMARK_CONFIG_FILE


def _is_multiple(value: float, step: float) -> bool:
    ratio = value / step
    return abs(ratio - round(ratio)) <= TOL_SAMPLING_JITTER * max(ratio, 1.0)


def _check_structure(labels: List[str] | None) -> List[str] | None:
    if labels is None:
        return None
    if not labels:
        raise ValueError("structure must list at least one term")
    for label in labels:
        try:
            parse_term(label)
        except NarxHysteresisError as exc:
            raise ValueError(str(exc)) from exc
    return labels


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class SimulationSection(_Section):
    dt: float = Field(DEFAULT_DT, gt=0)  # s
    sample_time: float = Field(DEFAULT_SAMPLE_TIME, gt=0)  # s
    duration: float = Field(DEFAULT_TRAINING_DURATION, gt=0)  # s
    seed: int = Field(0, ge=0, lt=2**64)

    @model_validator(mode="after")
    def check_grid(self) -> "SimulationSection":
        if self.sample_time < self.dt or not _is_multiple(self.sample_time, self.dt):
            raise ConfigError(
                f"sample_time {self.sample_time} must be an integer multiple of dt {self.dt}",
                key_path="simulation.sample_time",
            )
        return self

    def sim_config(
        self,
        sample_time: float | None = None,
        duration: float | None = None,
        seed: int | None = None,
    ) -> SimConfig:
        return SimConfig(
            dt=self.dt,
            sample_time=self.sample_time if sample_time is None else sample_time,
            duration=self.duration if duration is None else duration,
            seed=self.seed if seed is None else seed,
        )


class PlantSection(_Section):
    d_p: float = DEFAULT_D_P  # µm/V
    A: float = DEFAULT_A  # µm/V
    beta: float = Field(DEFAULT_BETA, ge=0)  # 1/V
    gamma: float = Field(DEFAULT_GAMMA, ge=0)  # 1/V

    def params(self) -> BoucWenParams:
        return BoucWenParams(d_p=self.d_p, A=self.A, beta=self.beta, gamma=self.gamma)


class ExcitationSection(_Section):
    cutoff_hz: float = Field(DEFAULT_CUTOFF_HZ, gt=0)
    order: int = Field(DEFAULT_FILTER_ORDER, ge=1)
    amplitude: float = Field(DEFAULT_EXCITATION_AMPLITUDE, gt=0)  # V, peak


class SinusoidSection(_Section):
    amplitude: float = DEFAULT_VALIDATION_AMPLITUDE
    freq_hz: float = Field(DEFAULT_SIGNAL_FREQ_HZ, gt=0)
    offset: float = 0.0
    duration: float = Field(5.0, gt=0)  # s


class PoolSection(_Section):
    ell: int = Field(3, ge=1)
    n_y: int = Field(1, ge=1)
    n_u: int = Field(2, ge=1)
    tau_d: int = Field(1, ge=1)
    exclusions: List[ExclusionRule] = Field(
        default_factory=lambda: sorted(FULL_EXCLUSIONS, key=lambda r: r.value)
    )


class IdentificationSection(_Section):
    max_terms: int = Field(10, ge=1)
    use_aic: bool = True
    constrain_continuum: bool = True
    structure: List[str] | None = None  # fixed structure, bypasses selection

    @field_validator("structure")
    @classmethod
    def check_structure(cls, labels: List[str] | None) -> List[str] | None:
        return _check_structure(labels)

    def terms(self) -> List[Term] | None:
        return None if self.structure is None else [parse_term(s) for s in self.structure]


class InverseSection(IdentificationSection):
    tau_s: int = Field(2, ge=1)
    smoothing_window: int | None = Field(None, ge=3)
    exclusions: List[ExclusionRule] | None = None  # None keeps the pool exclusions

    @field_validator("smoothing_window")
    @classmethod
    def check_window(cls, window: int | None) -> int | None:
        if window is not None and window % 2 == 0:
            raise ValueError(f"smoothing_window must be odd, got {window}")
        return window


class CompensationSection(_Section):
    strategy: CompensationStrategy = CompensationStrategy.DIRECT
    amplitude: float = DEFAULT_REFERENCE_AMPLITUDE  # µm
    freq_hz: float = Field(DEFAULT_SIGNAL_FREQ_HZ, gt=0)
    offset: float = 0.0
    duration: float = Field(5.0, gt=0)  # s
    m0: float | None = None  # default: first reference sample


class MetricsSection(_Section):
    transient_skip: int | None = Field(None, ge=0)  # None: one reference period
    nsavi_pointwise: bool = False
    nsavi_epsilon: float | None = Field(None, gt=0)


class SweepSection(_Section):
    sample_times: List[float] = Field(default_factory=lambda: list(DEFAULT_SWEEP_SAMPLE_TIMES))
    beta_start: float = Field(BETA_SWEEP_START, ge=0)
    beta_stop: float = Field(BETA_SWEEP_STOP, ge=0)
    beta_step: float = Field(BETA_SWEEP_STEP, gt=0)
    periods: int = Field(2, ge=1)  # validation periods per beta run


class ExperimentConfig(_Section):
    """Complete configuration of the identification and compensation pipelines."""

    simulation: SimulationSection = Field(default_factory=SimulationSection)
    plant: PlantSection | None = None
    excitation: ExcitationSection = Field(default_factory=ExcitationSection)
    validation: SinusoidSection = Field(default_factory=SinusoidSection)
    pool: PoolSection = Field(default_factory=PoolSection)
    identification: IdentificationSection = Field(default_factory=IdentificationSection)
    inverse: InverseSection = Field(default_factory=InverseSection)
    compensation: CompensationSection = Field(default_factory=CompensationSection)
    metrics: MetricsSection = Field(default_factory=MetricsSection)
    sweep: SweepSection = Field(default_factory=SweepSection)

    @model_validator(mode="after")
    def check_cross_fields(self) -> "ExperimentConfig":
        sim = self.simulation
        if self.excitation.cutoff_hz >= 0.5 / sim.dt:
            raise ConfigError(
                f"Cutoff {self.excitation.cutoff_hz} Hz is not below the Nyquist frequency of 1/dt",
                key_path="excitation.cutoff_hz",
            )
        for name in ("validation", "compensation"):
            freq = getattr(self, name).freq_hz
            if freq >= 0.5 / sim.sample_time:
                raise ConfigError(
                    f"{name} frequency {freq} Hz is not below the Nyquist frequency",
                    key_path=f"{name}.freq_hz",
                )
        if self.inverse.tau_s < self.pool.tau_d + 1:
            raise ConfigError(
                f"inverse.tau_s must be >= pool.tau_d + 1 = {self.pool.tau_d + 1}",
                key_path="inverse.tau_s",
            )
        for i, sample_time in enumerate(self.sweep.sample_times):
            if sample_time < sim.dt or not _is_multiple(sample_time, sim.dt):
                raise ConfigError(
                    f"Sweep sample time {sample_time} is not an integer multiple of dt {sim.dt}",
                    key_path=f"sweep.sample_times.{i}",
                )
        if self.sweep.beta_stop < self.sweep.beta_start:
            raise ConfigError("sweep.beta_stop is below sweep.beta_start", key_path="sweep.beta_stop")
        return self

    def require(self, section: str) -> Any:
        """Return an optional section, raising ConfigError when it is absent."""
        value = getattr(self, section, None)
        if value is None:
            raise ConfigError(f"Configuration section '{section}' is required", key_path=section)
        return value

    def inverse_exclusions(self) -> List[ExclusionRule]:
        if self.inverse.exclusions is not None:
            return list(self.inverse.exclusions)
        return [r for r in self.pool.exclusions if r is not ExclusionRule.DELAY_NONLINEAR]


def validate_experiment_config(raw: Dict[str, Any]) -> ExperimentConfig:
    """Validate a parsed experiment document.

    Raises:
        ConfigError: A key missing, unknown or invalid, named by its dotted path
    """
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as exc:
        first = exc.errors()[0]
        key_path = ".".join(str(part) for part in first["loc"])
        raise ConfigError(
            f"Invalid configuration at '{key_path}': {first['msg']}",
            key_path=key_path,
            detail=str(exc),
        ) from exc


def override_sections(
    config: ExperimentConfig, updates: Dict[str, Dict[str, Any]]
) -> ExperimentConfig:
    """Re-validated copy of a config with individual section values replaced."""
    raw = config.model_dump(mode="json")
    for section, values in updates.items():
        if values:
            raw[section] = {**(raw.get(section) or {}), **values}
            _LOGGER.debug("Overriding %s: %s", section, values)
    return validate_experiment_config(raw)


def load_experiment_config(path: Path | str | None = None) -> ExperimentConfig:
    """Load and validate a JSON experiment file; no path loads the shipped default.

    Raises:
        ConfigError: File unreadable or a key missing, unknown or invalid
    """
    source = default_config_path() if path is None else Path(path)
    try:
        raw = json.loads(source.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"Configuration file not found: {source}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"Invalid JSON in {source} at line {exc.lineno}: {exc.msg}") from exc
    config = validate_experiment_config(raw)
    _LOGGER.info("Loaded configuration %s", source)
    return config
