"""Tests for the Bouc-Wen simulator, excitation signals and loop geometry."""

import logging

import numpy as np
import pytest
from scipy import signal as sps

from PyNarxHysteresis.exceptions import ConfigError, NumericError
from PyNarxHysteresis.narx import Signal
from PyNarxHysteresis.plant import (
    BoucWenParams,
    BoucWenPlant,
    SimConfig,
    SinusoidInput,
    SupportsInputSpec,
    TabulatedInput,
    beta_sweep,
    beta_values,
    butterworth_lowpass,
    filter_poles,
    hold_input,
    loop_geometry,
    make_filtered_noise_excitation,
    make_sinusoid,
    simulate_bouc_wen,
)

_LOGGER = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Tests
# ---------------------------------------------------------------------------


def test_sim_config_grid() -> None:
    """Sample time must be a multiple of dt and the grid covers every sample."""
    cfg = SimConfig(dt=0.001, sample_time=0.005, duration=1.0)

    assert cfg.decimation == 5
    assert cfg.n_samples == 200
    assert cfg.n_steps == 199 * 5 + 1

    with pytest.raises(ConfigError) as excinfo:
        SimConfig(dt=0.001, sample_time=0.0015)
    assert excinfo.value.key_path == "simulation.sample_time"
    with pytest.raises(ConfigError):
        SimConfig(dt=0.002, sample_time=0.001)
    with pytest.raises(ConfigError):
        SimConfig(seed=-1)


def test_params_validation() -> None:
    with pytest.raises(ConfigError):
        BoucWenParams(beta=-0.1)
    with pytest.raises(ConfigError):
        BoucWenParams(A=float("nan"))

    params = BoucWenParams()
    assert params.as_dict() == {"d_p": 1.6, "A": 0.9, "beta": 0.008, "gamma": 0.008}
    assert params.with_beta(0.02).beta == 0.02


def test_linear_plant_without_hysteresis() -> None:
    """With beta = gamma = 0 the output is (d_p - A) u."""
    _LOGGER.info("=== Testing Linear Bouc-Wen Limit ===")

    params = BoucWenParams(beta=0.0, gamma=0.0)
    u, y = simulate_bouc_wen(params, SinusoidInput(40.0, 1.0), SimConfig(duration=2.0))

    np.testing.assert_allclose(y.samples, 0.7 * u.samples, atol=1e-8)


def test_hysteresis_loop_orientation() -> None:
    """The benchmark actuator draws a counter-clockwise loop with positive area."""
    _LOGGER.info("=== Testing Loop Orientation ===")

    cfg = SimConfig(duration=2.0)
    u, y = simulate_bouc_wen(BoucWenParams(), SinusoidInput(40.0, 1.0), cfg)
    geometry = loop_geometry(u, y, 1000)

    _LOGGER.info(
        "Span %.3f, opening %.3f, area %.3f",
        geometry["output_span"],
        geometry["max_opening"],
        geometry["area"],
    )
    assert geometry["max_opening"] > 1.0
    assert geometry["area"] > 0.0
    assert not geometry["diverged"]


def test_decimation_matches_fine_grid() -> None:
    """Decimated samples equal every n-th sample of the fine simulation."""
    spec = SinusoidInput(40.0, 1.0)
    _, fine = simulate_bouc_wen(BoucWenParams(), spec, SimConfig(sample_time=0.001, duration=1.0))
    _, coarse = simulate_bouc_wen(BoucWenParams(), spec, SimConfig(sample_time=0.005, duration=1.0))

    np.testing.assert_allclose(coarse.samples, fine.samples[::5][: len(coarse)], rtol=1e-12)
    assert coarse.sample_time == 0.005


def test_input_specs_satisfy_protocol() -> None:
    assert isinstance(SinusoidInput(1.0, 1.0), SupportsInputSpec)
    assert isinstance(TabulatedInput(Signal(np.zeros(4), 0.001)), SupportsInputSpec)
    assert not isinstance(object(), SupportsInputSpec)


def test_tabulated_input_matches_analytic() -> None:
    """A sampled sinusoid drives the plant like the analytic one."""
    cfg = SimConfig(duration=2.0)
    analytic = SinusoidInput(40.0, 1.0)
    u_exact, y_exact = simulate_bouc_wen(BoucWenParams(), analytic, cfg)

    _, y_table = simulate_bouc_wen(BoucWenParams(), TabulatedInput(u_exact), cfg)

    np.testing.assert_allclose(y_table.samples, y_exact.samples, atol=1e-2)


def test_tabulated_input_too_short() -> None:
    short = Signal(np.zeros(10), 0.001)

    with pytest.raises(NumericError):
        simulate_bouc_wen(BoucWenParams(), TabulatedInput(short), SimConfig(duration=1.0))


def test_hold_input_freezes_output() -> None:
    """Once the input freezes the plant output stays constant."""
    _LOGGER.info("=== Testing Plant Hold Point ===")

    cfg = SimConfig(duration=1.0)
    u = hold_input(40.0, 1.0, 16.8, cfg)
    y = BoucWenPlant(BoucWenParams()).respond(u)
    frozen = int(np.argmax(u.samples >= 16.8))

    np.testing.assert_array_equal(u.samples[frozen:], 16.8)
    tail = y.samples[frozen + 2 :]
    np.testing.assert_allclose(tail, tail[0], atol=1e-12)

    with pytest.raises(ConfigError):
        hold_input(40.0, 1.0, 50.0, cfg)


def test_butterworth_response() -> None:
    """Fifth-order low-pass: -3 dB at cutoff, at least 90 dB down a decade above."""
    _LOGGER.info("=== Testing Butterworth Excitation Filter ===")

    sos = butterworth_lowpass(5, 1.0, 1000.0)
    _, h = sps.sosfreqz(sos, worN=[1.0, 10.0], fs=1000.0)
    gain_db = 20 * np.log10(np.abs(h))

    assert gain_db[0] == pytest.approx(-3.0103, abs=1e-3)
    assert gain_db[1] <= -90.0
    assert np.all(np.abs(filter_poles(sos)) < 1.0)


def test_butterworth_rejects_bad_cutoff() -> None:
    with pytest.raises(ConfigError):
        butterworth_lowpass(5, 600.0, 1000.0)
    with pytest.raises(ConfigError):
        butterworth_lowpass(0, 1.0, 1000.0)


def test_rk4_convergence_order() -> None:
    """Halving the step cuts the sampled output error by about 2^4."""
    _LOGGER.info("=== Testing RK4 Convergence Order ===")

    params = BoucWenParams()
    u = SinusoidInput(amplitude=40.0, freq_hz=1.0)

    def run(dt: float) -> np.ndarray:
        _, y = simulate_bouc_wen(params, u, SimConfig(dt=dt, sample_time=0.01, duration=0.2))
        return y.samples

    reference = run(0.0005)
    errors = [np.max(np.abs(run(dt) - reference)) for dt in (0.01, 0.005, 0.0025)]
    orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    _LOGGER.info("Errors %s, observed orders %s", errors, orders)

    assert np.all(orders >= 3.5)


def test_butterworth_poles_match_bilinear_oracle() -> None:
    """Pre-warped analog prototype mapped through the bilinear transform."""
    order, cutoff, fs = 5, 1.0, 1000.0
    warped = 2.0 * fs * np.tan(np.pi * cutoff / fs)
    k = np.arange(1, order + 1)
    analog = warped * np.exp(1j * np.pi * (2 * k + order - 1) / (2 * order))
    expected = (2.0 * fs + analog) / (2.0 * fs - analog)

    poles = filter_poles(butterworth_lowpass(order, cutoff, fs))
    poles = poles[np.abs(poles) > 0.5]  # odd orders pad one section with a pole at 0

    assert len(poles) == order
    for pole in expected:
        assert np.min(np.abs(poles - pole)) <= 1e-9


def test_filtered_noise_is_reproducible() -> None:
    """Same seed gives the same excitation; peak equals the amplitude."""
    cfg = SimConfig(duration=5.0, seed=42)

    first = make_filtered_noise_excitation(1.0, 5, cfg, 70.0)
    second = make_filtered_noise_excitation(1.0, 5, cfg, 70.0)
    other = make_filtered_noise_excitation(1.0, 5, SimConfig(duration=5.0, seed=43), 70.0)

    np.testing.assert_array_equal(first.samples, second.samples)
    assert not np.array_equal(first.samples, other.samples)
    assert np.max(np.abs(first.samples)) == pytest.approx(70.0)
    assert first.sample_time == cfg.dt
    assert len(first) == cfg.n_steps


def test_make_sinusoid() -> None:
    cfg = SimConfig(duration=1.0)
    wave = make_sinusoid(40.0, 1.0, 0.0, cfg)

    assert len(wave) == 1000
    assert wave.samples[250] == pytest.approx(40.0)

    with pytest.raises(ConfigError):
        make_sinusoid(1.0, 500.0, 0.0, cfg)


def test_beta_values_default_range() -> None:
    values = beta_values()

    assert len(values) == 49
    assert values[0] == 0.004
    assert values[-1] == 0.1
    with pytest.raises(ConfigError):
        beta_values(0.1, 0.004, 0.002)


def test_beta_sweep_span_grows_with_beta() -> None:
    """Stronger hysteresis damping lets the output span grow."""
    _LOGGER.info("=== Testing Beta Sweep ===")

    cfg = SimConfig(duration=2.0)
    records = beta_sweep(
        BoucWenParams(), [0.004, 0.02, 0.05, 0.1], SinusoidInput(40.0, 1.0), cfg, 1000
    )

    spans = [r["output_span"] for r in records]
    _LOGGER.info("Spans: %s", spans)
    assert [r["beta"] for r in records] == [0.004, 0.02, 0.05, 0.1]
    assert np.all(np.diff(spans) > 0)
    assert not any(r["diverged"] for r in records)


def test_beta_sweep_records_divergence() -> None:
    """A diverging run is kept as a NaN record."""
    params = BoucWenParams(beta=0.0, gamma=0.0, A=1e15)
    records = beta_sweep(params, [0.0], SinusoidInput(40.0, 1.0), SimConfig(duration=1.0), 500)

    assert records[0]["diverged"]
    assert np.isnan(records[0]["output_span"])


def test_loop_geometry_rejects_bad_period() -> None:
    u = Signal(np.zeros(10), 0.001)

    with pytest.raises(NumericError):
        loop_geometry(u, u, 20)
