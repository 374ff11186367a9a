"""Bouc-Wen piezoelectric actuator simulator and excitation signals"""

from dataclasses import dataclass, replace
import logging
import math
from typing import List, NamedTuple, Protocol, Sequence, Tuple, runtime_checkable

import numpy as np
from scipy import signal as sps

from .const import (
    BETA_SWEEP_START,
    BETA_SWEEP_STEP,
    BETA_SWEEP_STOP,
    DEFAULT_A,
    DEFAULT_BETA,
    DEFAULT_D_P,
    DEFAULT_DT,
    DEFAULT_GAMMA,
    DEFAULT_SAMPLE_TIME,
    DEFAULT_TRAINING_DURATION,
    DIVERGENCE_THRESHOLD,
    TOL_SAMPLING_JITTER,
)
from .exceptions import ConfigError, DivergenceError, NumericError
from .helper import FloatArray, shoelace_area
from .narx import Signal
from .types import BoucWenParamsDict, LoopGeometry

_LOGGER = logging.getLogger(__name__)

_OPENING_GRID = 256  # interpolation points used to compare loop branches


@dataclass(frozen=True)
class BoucWenParams:
    """Parameters of dh/dt = A du/dt - beta |du/dt| h - gamma du/dt |h|, y = d_p u - h."""

    d_p: float = DEFAULT_D_P  # µm/V
    A: float = DEFAULT_A  # µm/V
    beta: float = DEFAULT_BETA  # 1/V
    gamma: float = DEFAULT_GAMMA  # 1/V

    def __post_init__(self) -> None:
        for name in ("d_p", "A", "beta", "gamma"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"Bouc-Wen {name} must be finite", key_path=f"plant.{name}")
        if self.beta < 0 or self.gamma < 0:
            raise ConfigError(
                f"Bouc-Wen beta and gamma must be >= 0, got {self.beta}, {self.gamma}",
                key_path="plant",
            )

    def as_dict(self) -> BoucWenParamsDict:
        return {"d_p": self.d_p, "A": self.A, "beta": self.beta, "gamma": self.gamma}

    def with_beta(self, beta: float) -> "BoucWenParams":
        return replace(self, beta=beta)


@dataclass(frozen=True)
class SimConfig:
    """Integration grid and sampling of one simulation run."""

    dt: float = DEFAULT_DT  # s
    sample_time: float = DEFAULT_SAMPLE_TIME  # s
    duration: float = DEFAULT_TRAINING_DURATION  # s
    seed: int = 0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ConfigError(f"dt must be positive, got {self.dt}", key_path="simulation.dt")
        if self.sample_time < self.dt:
            raise ConfigError(
                f"Sample time {self.sample_time} is shorter than dt {self.dt}",
                key_path="simulation.sample_time",
            )
        ratio = self.sample_time / self.dt
        if abs(ratio - round(ratio)) > TOL_SAMPLING_JITTER * ratio:
            raise ConfigError(
                f"Sample time {self.sample_time} is not an integer multiple of dt {self.dt}",
                key_path="simulation.sample_time",
            )
        if self.duration < self.sample_time:
            raise ConfigError(
                f"Duration {self.duration} is shorter than one sample",
                key_path="simulation.duration",
            )
        if self.seed < 0 or self.seed >= 2**64:
            raise ConfigError(f"Seed must fit in 64 bits, got {self.seed}", key_path="simulation.seed")

    @property
    def decimation(self) -> int:
        """Integration steps per sample."""
        return int(round(self.sample_time / self.dt))

    @property
    def n_samples(self) -> int:
        return int(round(self.duration / self.sample_time))

    @property
    def n_steps(self) -> int:
        """Integration grid points covering every sample instant."""
        return (self.n_samples - 1) * self.decimation + 1


class InputGrid(NamedTuple):
    value: FloatArray  # u at the grid points
    rate: FloatArray  # du/dt at the grid points
    half_rate: FloatArray  # du/dt half a step after each grid point


@runtime_checkable
class SupportsInputSpec(Protocol):
    """Continuous-time input evaluated on an integration grid."""

    def on_grid(self, dt: float, n_steps: int) -> InputGrid:
        ...


@dataclass(frozen=True)
class SinusoidInput:
    """u(t) = offset + amplitude sin(2 pi f t), derivative in closed form."""

    amplitude: float
    freq_hz: float
    offset: float = 0.0

    def on_grid(self, dt: float, n_steps: int) -> InputGrid:
        omega = 2.0 * math.pi * self.freq_hz
        t = np.arange(n_steps, dtype=float) * dt
        t_half = t[:-1] + 0.5 * dt
        return InputGrid(
            value=self.offset + self.amplitude * np.sin(omega * t),
            rate=self.amplitude * omega * np.cos(omega * t),
            half_rate=self.amplitude * omega * np.cos(omega * t_half),
        )


@dataclass(frozen=True)
class TabulatedInput:
    """Sampled input interpolated linearly onto the integration grid.

    The derivative uses central differences on the grid, one-sided at the
    edges; half-step derivatives average the neighbouring grid points.
    """

    samples: Signal

    def on_grid(self, dt: float, n_steps: int) -> InputGrid:
        t = np.arange(n_steps, dtype=float) * dt
        last = self.samples.time[-1]
        if t[-1] > last * (1.0 + TOL_SAMPLING_JITTER) + TOL_SAMPLING_JITTER:
            raise NumericError(
                f"Tabulated input ends at {last} s, simulation needs {t[-1]} s"
            )
        value = np.interp(t, self.samples.time, self.samples.samples)
        if n_steps < 2:
            rate = np.zeros_like(value)
        else:
            rate = np.gradient(value, dt)
        return InputGrid(value=value, rate=rate, half_rate=0.5 * (rate[:-1] + rate[1:]))


def simulate_bouc_wen(
    params: BoucWenParams, u: SupportsInputSpec, cfg: SimConfig
) -> Tuple[Signal, Signal]:
    """Integrate the hysteretic state with fourth-order Runge-Kutta.

    Args:
        params: Actuator parameters
        u: Input specification providing u and du/dt on the grid
        cfg: Integration step, sample time and duration

    Returns:
        Input and output sampled at cfg.sample_time, starting from h(0) = 0
    """
    grid = u.on_grid(cfg.dt, cfg.n_steps)
    a, beta, gamma = params.A, params.beta, params.gamma
    dt = cfg.dt

    def rhs(h: float, rate: float) -> float:
        return a * rate - beta * abs(rate) * h - gamma * rate * abs(h)

    rate = grid.rate.tolist()
    half = grid.half_rate.tolist()
    h = np.zeros(cfg.n_steps, dtype=float)
    state = 0.0
    for i in range(cfg.n_steps - 1):
        k1 = rhs(state, rate[i])
        k2 = rhs(state + 0.5 * dt * k1, half[i])
        k3 = rhs(state + 0.5 * dt * k2, half[i])
        k4 = rhs(state + dt * k3, rate[i + 1])
        state += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not math.isfinite(state) or abs(state) > DIVERGENCE_THRESHOLD:
            time_s = (i + 1) * dt
            _LOGGER.warning("Bouc-Wen state diverged at t = %.6f s", time_s)
            raise DivergenceError(
                f"Bouc-Wen state diverged at t = {time_s:.6f} s", index=i + 1, time_s=time_s
            )
        h[i + 1] = state

    y = params.d_p * grid.value - h
    step = cfg.decimation
    _LOGGER.debug(
        "Integrated %d RK4 step(s), %d sample(s) kept", cfg.n_steps - 1, cfg.n_samples
    )
    return (
        Signal(grid.value[::step], cfg.sample_time),
        Signal(y[::step], cfg.sample_time),
    )


def butterworth_lowpass(order: int, cutoff_hz: float, sample_rate: float) -> FloatArray:
    """Digital Butterworth low-pass as second-order sections.

    The bilinear transform is pre-warped at the cutoff frequency.
    """
    if order < 1:
        raise ConfigError(f"Filter order must be >= 1, got {order}", key_path="excitation.order")
    nyquist = 0.5 * sample_rate
    if not 0 < cutoff_hz < nyquist:
        raise ConfigError(
            f"Cutoff {cutoff_hz} Hz must lie in (0, {nyquist}) Hz",
            key_path="excitation.cutoff_hz",
        )
    sos = np.asarray(
        sps.butter(order, cutoff_hz, btype="low", output="sos", fs=sample_rate), dtype=float
    )
    poles = filter_poles(sos)
    if np.any(np.abs(poles) >= 1.0):
        raise NumericError("Butterworth realization has poles on or outside the unit circle")
    return sos


def filter_poles(sos: FloatArray) -> np.ndarray:
    _, poles, _ = sps.sos2zpk(sos)
    return np.asarray(poles)


def make_filtered_noise_excitation(
    cutoff_hz: float, order: int, cfg: SimConfig, amplitude: float
) -> Signal:
    """Low-pass filtered Gaussian noise scaled to a peak amplitude.

    The noise is drawn on the integration grid from PCG64 seeded with
    cfg.seed, so the returned signal is sampled at cfg.dt and is meant to
    drive the plant through TabulatedInput.
    """
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    noise = rng.standard_normal(cfg.n_steps)
    sos = butterworth_lowpass(order, cutoff_hz, 1.0 / cfg.dt)
    filtered = sps.sosfilt(sos, noise)
    peak = float(np.max(np.abs(filtered)))
    if peak == 0.0:
        raise NumericError("Filtered noise is identically zero")
    _LOGGER.info(
        "Excitation: %d sample(s), order %d, cutoff %.3g Hz, peak %.3g",
        cfg.n_steps,
        order,
        cutoff_hz,
        amplitude,
    )
    return Signal(filtered * (amplitude / peak), cfg.dt)


def make_sinusoid(amplitude: float, freq_hz: float, offset: float, cfg: SimConfig) -> Signal:
    if not 0 <= freq_hz < 0.5 / cfg.sample_time:
        raise ConfigError(
            f"Sinusoid frequency {freq_hz} Hz is not below the Nyquist frequency",
            key_path="freq_hz",
        )
    k = np.arange(cfg.n_samples, dtype=float)
    return Signal(
        offset + amplitude * np.sin(2.0 * math.pi * freq_hz * k * cfg.sample_time),
        cfg.sample_time,
    )


def hold_input(
    amplitude: float, freq_hz: float, hold_value: float, cfg: SimConfig, offset: float = 0.0
) -> Signal:
    """Sinusoid frozen at the first sample reaching hold_value."""
    wave = np.array(make_sinusoid(amplitude, freq_hz, offset, cfg).samples)
    reached = wave >= hold_value if hold_value >= offset else wave <= hold_value
    if not reached.any():
        raise ConfigError(f"Sinusoid never reaches the hold value {hold_value}")
    start = int(np.argmax(reached))
    wave[start:] = hold_value
    return Signal(wave, cfg.sample_time)


def _branch_opening(u: FloatArray, y: FloatArray) -> float:
    du = np.diff(u)
    loading = np.flatnonzero(du > 0) + 1
    unloading = np.flatnonzero(du < 0) + 1
    if loading.size < 2 or unloading.size < 2:
        return 0.0
    low = max(u[loading].min(), u[unloading].min())
    high = min(u[loading].max(), u[unloading].max())
    if high <= low:
        return 0.0
    grid = np.linspace(low, high, _OPENING_GRID)
    up = np.argsort(u[loading])
    down = np.argsort(u[unloading])
    y_up = np.interp(grid, u[loading][up], y[loading][up])
    y_down = np.interp(grid, u[unloading][down], y[unloading][down])
    return float(np.max(np.abs(y_up - y_down)))


def loop_geometry(
    u: Signal, y: Signal, period_samples: int, beta: float | None = None
) -> LoopGeometry:
    """Shape of the u x y loop over the last input period."""
    if period_samples < 3 or period_samples > len(u):
        raise NumericError(
            f"Loop period of {period_samples} sample(s) does not fit {len(u)} sample(s)"
        )
    u_w = np.asarray(u.samples[-period_samples:])
    y_w = np.asarray(y.samples[-period_samples:])
    return {
        "beta": beta,
        "output_span": float(np.ptp(y_w)),
        "max_opening": _branch_opening(u_w, y_w),
        "area": shoelace_area(u_w, y_w),
        "diverged": False,
    }


def beta_values(
    start: float = BETA_SWEEP_START, stop: float = BETA_SWEEP_STOP, step: float = BETA_SWEEP_STEP
) -> List[float]:
    if step <= 0 or stop < start:
        raise ConfigError(f"Invalid beta range [{start}, {stop}] step {step}", key_path="sweep")
    count = int(round((stop - start) / step)) + 1
    return [round(start + i * step, 12) for i in range(count)]


def beta_sweep(
    base: BoucWenParams,
    betas: Sequence[float],
    u: SupportsInputSpec,
    cfg: SimConfig,
    period_samples: int,
) -> List[LoopGeometry]:
    """Loop geometry for each beta; divergent runs are recorded and skipped."""
    records: List[LoopGeometry] = []
    for beta in betas:
        try:
            u_s, y_s = simulate_bouc_wen(base.with_beta(beta), u, cfg)
        except DivergenceError as exc:
            _LOGGER.warning("Beta %.4g diverged at t = %s s", beta, exc.time_s)
            records.append(
                {
                    "beta": beta,
                    "output_span": math.nan,
                    "max_opening": math.nan,
                    "area": math.nan,
                    "diverged": True,
                }
            )
            continue
        records.append(loop_geometry(u_s, y_s, period_samples, beta=beta))
    _LOGGER.info("Beta sweep: %d run(s)", len(records))
    return records


class BoucWenPlant:
    """Plant evaluator driving the Bouc-Wen model with a sampled input."""

    def __init__(self, params: BoucWenParams, dt: float = DEFAULT_DT) -> None:
        self.params = params
        self.dt = dt

    def __repr__(self) -> str:
        return f"BoucWenPlant(params={self.params}, dt={self.dt})"

    def respond(self, u: Signal) -> Signal:
        cfg = SimConfig(
            dt=self.dt, sample_time=u.sample_time, duration=len(u) * u.sample_time
        )
        _, y = simulate_bouc_wen(self.params, TabulatedInput(u), cfg)
        return y
