"""Identification, compensation and sweep pipelines"""

from dataclasses import dataclass
import logging
import math
from typing import Any, Dict, List, Sequence, Tuple

from .analysis import SteadyStateReport, build_continuum_constraint, steady_state_analyze
from .compensation import (
    ChainResult,
    CompensatorLaw,
    evaluate_chain,
    shift_for_inverse,
    synthesize_direct,
    synthesize_inverse,
)
from .config import ExperimentConfig
from .const import FORMAT_VERSION, NOISE_GENERATOR
from .estimation import SelectionReport, fit_model, frols_select, with_aic
from .exceptions import ConfigError, NumericError, StructuralError
from .metrics import mape
from .narx import NarxModel, Signal, free_run
from .plant import (
    BoucWenPlant,
    SinusoidInput,
    TabulatedInput,
    beta_sweep,
    beta_values,
    make_filtered_noise_excitation,
    make_sinusoid,
    simulate_bouc_wen,
)
from .terms import generate_term_pool
from .types import (
    CompensationStrategy,
    DatasetMetadata,
    LoopGeometry,
    SamplingSweepRow,
)

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class IdentificationResult:
    model: NarxModel
    steady_state: SteadyStateReport
    report: SelectionReport | None = None  # None when the structure was fixed

    def summary(self) -> Dict[str, Any]:
        return {
            "inverse": self.model.tau_s > 0,
            "n_terms": len(self.model.terms),
            "sigma_y": self.steady_state.sigma_y,
            "classification": self.steady_state.classification.value,
            "model": str(self.model),
            "selection": None if self.report is None else self.report.rows(),
            "chosen_size": None if self.report is None else self.report.chosen_size,
            "notes": [] if self.report is None else list(self.report.notes),
        }


def period_samples(freq_hz: float, sample_time: float) -> int:
    return int(round(1.0 / (freq_hz * sample_time)))


def default_transient_skip(
    config: ExperimentConfig, freq_hz: float, sample_time: float, n_samples: int
) -> int:
    """Configured skip, or one signal period when it fits the record."""
    if config.metrics.transient_skip is not None:
        return config.metrics.transient_skip
    skip = period_samples(freq_hz, sample_time)
    return skip if skip < n_samples else 0


def _metadata(
    config: ExperimentConfig, source: str, signal: Signal, seed: int | None, generator: str | None
) -> DatasetMetadata:
    plant = config.plant
    return {
        "format_version": FORMAT_VERSION,
        "source": source,
        "sample_time": signal.sample_time,
        "dt": config.simulation.dt,
        "n_samples": len(signal),
        "seed": seed,
        "generator": generator,
        "params": None if plant is None else plant.params().as_dict(),
    }


def excitation_signal(
    config: ExperimentConfig, seed: int | None = None, duration: float | None = None
) -> Tuple[Signal, DatasetMetadata]:
    """Filtered-noise excitation on the integration grid."""
    cfg = config.simulation.sim_config(duration=duration, seed=seed)
    exc = config.excitation
    u = make_filtered_noise_excitation(exc.cutoff_hz, exc.order, cfg, exc.amplitude)
    return u, _metadata(config, "filtered_noise", u, cfg.seed, NOISE_GENERATOR)


def training_data(
    config: ExperimentConfig,
    seed: int | None = None,
    duration: float | None = None,
    sample_time: float | None = None,
) -> Tuple[Signal, Signal, DatasetMetadata]:
    params = config.require("plant").params()
    cfg = config.simulation.sim_config(sample_time=sample_time, duration=duration, seed=seed)
    excitation, _ = excitation_signal(config, seed=cfg.seed, duration=cfg.duration)
    u, y = simulate_bouc_wen(params, TabulatedInput(excitation), cfg)
    _LOGGER.info("Training data: %d sample(s) at T_s = %g s", len(u), cfg.sample_time)
    return u, y, _metadata(config, "filtered_noise", u, cfg.seed, NOISE_GENERATOR)


def validation_data(
    config: ExperimentConfig, sample_time: float | None = None
) -> Tuple[Signal, Signal, DatasetMetadata]:
    params = config.require("plant").params()
    val = config.validation
    cfg = config.simulation.sim_config(sample_time=sample_time, duration=val.duration)
    u, y = simulate_bouc_wen(params, SinusoidInput(val.amplitude, val.freq_hz, val.offset), cfg)
    return u, y, _metadata(config, "sinusoid", u, None, None)


def identify(
    config: ExperimentConfig,
    u: Signal,
    y: Signal,
    *,
    inverse: bool = False,
    tau_s: int | None = None,
    constrain: bool | None = None,
) -> IdentificationResult:
    """Select (unless fixed) and estimate a direct or inverse model.

    Args:
        config: Experiment configuration
        u: Measured input
        y: Measured output
        inverse: Identify u from the advanced output instead of y from u
        tau_s: Override of the configured causality shift
        constrain: Override of the continuum constraint switch
    """
    pool_cfg = config.pool
    section = config.inverse if inverse else config.identification
    shift = 0
    x, target = u, y
    exclusions = pool_cfg.exclusions
    if inverse:
        shift = config.inverse.tau_s if tau_s is None else tau_s
        x, target = shift_for_inverse(
            u, y, shift, pool_cfg.tau_d, config.inverse.smoothing_window
        )
        exclusions = config.inverse_exclusions()

    report: SelectionReport | None = None
    terms = section.terms()
    if terms is None:
        pool = generate_term_pool(
            pool_cfg.ell, pool_cfg.n_y, pool_cfg.n_u, exclusions, pool_cfg.tau_d
        )
        report = frols_select(pool, x, target, section.max_terms)
        if section.use_aic:
            report = with_aic(report, x, target)
        terms = report.selected()

    use_constraint = section.constrain_continuum if constrain is None else constrain
    constraint = None
    if use_constraint and any(t.is_linear_output for t in terms):
        constraint = build_continuum_constraint(terms)
    model = fit_model(
        terms,
        x,
        target,
        n_y=pool_cfg.n_y,
        n_u=pool_cfg.n_u,
        tau_d=pool_cfg.tau_d,
        tau_s=shift,
        constraint=constraint,
    )
    _LOGGER.info("Identified %s model: %s", "inverse" if inverse else "direct", model)
    return IdentificationResult(
        model=model, steady_state=steady_state_analyze(model), report=report
    )


def validate_model(
    model: NarxModel, u: Signal, y: Signal, transient_skip: int = 0
) -> Tuple[Signal, Signal, float]:
    """Free-run the model on measured data.

    Returns:
        Measured target, simulated target and their MAPE; inverse models
        are driven by the advanced output and compared with the input
    """
    x, target = u, y
    if model.tau_s:
        x, target = shift_for_inverse(u, y, model.tau_s, model.tau_d)
    start = max(model.history, model.n_y)
    simulated = free_run(model, x, target.samples[start - model.n_y : start])
    return target, simulated, mape(target, simulated, transient_skip)


def synthesize(model: NarxModel, strategy: CompensationStrategy | None = None) -> CompensatorLaw:
    """Law of the requested strategy; inverse models default to the inverse law."""
    if strategy is None:
        strategy = CompensationStrategy.INVERSE if model.tau_s else CompensationStrategy.DIRECT
    if strategy is CompensationStrategy.NONE:
        raise ConfigError("The uncompensated chain has no law to synthesize", key_path="compensation.strategy")
    if strategy is CompensationStrategy.INVERSE:
        return synthesize_inverse(model)
    return synthesize_direct(model)


def reference_signal(config: ExperimentConfig, sample_time: float | None = None) -> Signal:
    comp = config.compensation
    cfg = config.simulation.sim_config(sample_time=sample_time, duration=comp.duration)
    return make_sinusoid(comp.amplitude, comp.freq_hz, comp.offset, cfg)


def compensate(
    config: ExperimentConfig,
    law: CompensatorLaw | None,
    reference: Signal | None = None,
    with_baseline: bool = False,
) -> ChainResult:
    """Closed-chain evaluation on the configured plant; no law is the baseline."""
    params = config.require("plant").params()
    r = reference_signal(config) if reference is None else reference
    skip = default_transient_skip(
        config, config.compensation.freq_hz, r.sample_time, len(r) - (law.horizon if law else 0)
    )
    return evaluate_chain(
        law,
        BoucWenPlant(params, config.simulation.dt),
        r,
        m0=config.compensation.m0,
        transient_skip=skip,
        pointwise=config.metrics.nsavi_pointwise,
        epsilon=config.metrics.nsavi_epsilon,
        with_baseline=with_baseline,
    )


def _sweep_row(config: ExperimentConfig, sample_time: float) -> SamplingSweepRow:
    u, y, _ = training_data(config, sample_time=sample_time)
    u_val, y_val, _ = validation_data(config, sample_time=sample_time)
    skip = default_transient_skip(config, config.validation.freq_hz, sample_time, len(u_val))
    strategy = config.compensation.strategy

    direct = identify(config, u, y)
    _, _, model_mape = validate_model(direct.model, u_val, y_val, skip)
    law: CompensatorLaw | None = None
    if strategy is CompensationStrategy.DIRECT:
        law = synthesize_direct(direct.model)
    elif strategy is CompensationStrategy.INVERSE:
        law = synthesize_inverse(identify(config, u, y, inverse=True).model)
    chain = compensate(config, law, reference_signal(config, sample_time))
    return {"sample_time": sample_time, "model_mape": model_mape, "tracking_mape": chain.mape}


def sweep_sampling(
    config: ExperimentConfig, sample_times: Sequence[float] | None = None
) -> List[SamplingSweepRow]:
    """Model and tracking MAPE as functions of the sampling time."""
    times = list(sample_times or config.sweep.sample_times)
    for sample_time in times:
        config.simulation.sim_config(sample_time=sample_time)
    rows: List[SamplingSweepRow] = []
    for sample_time in times:
        try:
            rows.append(_sweep_row(config, sample_time))
        except (NumericError, StructuralError) as exc:
            _LOGGER.warning("Sampling time %g s failed: %s", sample_time, exc)
            rows.append(
                {"sample_time": sample_time, "model_mape": math.nan, "tracking_mape": math.nan}
            )
    return rows


def sweep_beta(config: ExperimentConfig) -> List[LoopGeometry]:
    params = config.require("plant").params()
    val = config.validation
    sweep = config.sweep
    cfg = config.simulation.sim_config(duration=sweep.periods / val.freq_hz)
    return beta_sweep(
        params,
        beta_values(sweep.beta_start, sweep.beta_stop, sweep.beta_step),
        SinusoidInput(val.amplitude, val.freq_hz, val.offset),
        cfg,
        period_samples(val.freq_hz, cfg.sample_time),
    )
