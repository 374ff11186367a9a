"""NARX models: regression matrices, one-step-ahead prediction and free run"""

from dataclasses import dataclass, field
import logging
import math
from typing import Dict, List, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from .const import DIVERGENCE_THRESHOLD
from .exceptions import DivergenceError, NumericError, StructuralError
from .helper import FloatArray, phi_arrays
from .terms import Term, evaluate_term, history_length
from .types import SignalKind

_LOGGER = logging.getLogger(__name__)


def _frozen_array(values: npt.ArrayLike) -> FloatArray:
    array = np.array(values, dtype=float)
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class Signal:
    """Uniformly sampled real-valued sequence."""

    samples: FloatArray
    sample_time: float  # s

    def __post_init__(self) -> None:
        samples = _frozen_array(self.samples)
        if samples.ndim != 1:
            raise NumericError(f"Signal must be one-dimensional, got shape {samples.shape}")
        if not np.all(np.isfinite(samples)):
            index = int(np.flatnonzero(~np.isfinite(samples))[0])
            raise NumericError(f"Signal has a non-finite sample at index {index}")
        if not (np.isfinite(self.sample_time) and self.sample_time > 0):
            raise NumericError(f"Sample time must be positive, got {self.sample_time}")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return len(self.samples)

    def __repr__(self) -> str:
        return f"Signal(n_samples={len(self)}, sample_time={self.sample_time})"

    @property
    def time(self) -> FloatArray:
        return np.arange(len(self), dtype=float) * self.sample_time

    def window(self, start: int, stop: int | None = None) -> "Signal":
        return Signal(self.samples[start:stop], self.sample_time)

    def with_samples(self, samples: npt.ArrayLike) -> "Signal":
        return Signal(np.asarray(samples, dtype=float), self.sample_time)


def compute_phi(u: Signal) -> Tuple[Signal, Signal]:
    """Input increment phi1 and its sign phi2, both zero at index 0."""
    if len(u) < 2:
        raise NumericError(f"phi needs at least 2 input samples, got {len(u)}")
    phi1, phi2 = phi_arrays(u.samples)
    return Signal(phi1, u.sample_time), Signal(phi2, u.sample_time)


@dataclass(frozen=True, eq=False)
class NarxModel:
    """Linear-in-the-parameters polynomial NARX model."""

    terms: Tuple[Term, ...]
    theta: FloatArray
    n_y: int
    n_u: int
    tau_d: int = 1
    tau_s: int = 0  # causality shift, 0 for direct models
    sample_time: float | None = field(default=None)

    def __post_init__(self) -> None:
        terms = tuple(self.terms)
        theta = _frozen_array(self.theta)
        if theta.shape != (len(terms),):
            raise StructuralError(
                f"Model has {len(terms)} term(s) but {theta.size} parameter(s)"
            )
        if not np.all(np.isfinite(theta)):
            raise NumericError("Model parameters must be finite")
        if self.n_y < 1 or self.n_u < 1:
            raise StructuralError(f"Lags must be >= 1, got n_y={self.n_y}, n_u={self.n_u}")
        if self.tau_d < 1:
            raise StructuralError(f"Pure delay must be >= 1, got {self.tau_d}")
        if self.tau_s < 0:
            raise StructuralError(f"Causality shift must be >= 0, got {self.tau_s}")
        max_lag = max(self.n_y, self.n_u)
        too_long = [t.label for t in terms if t.max_lag > max_lag]
        if too_long:
            raise StructuralError(
                f"Terms exceed the maximum lag {max_lag}", offending_terms=too_long
            )
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "theta", theta)

    def __repr__(self) -> str:
        return (
            f"NarxModel(terms={len(self.terms)}, n_y={self.n_y}, n_u={self.n_u}, "
            f"tau_d={self.tau_d}, tau_s={self.tau_s})"
        )

    def __str__(self) -> str:
        body = " + ".join(f"{value!r}*{term.label}" for term, value in self.parameters())
        return f"y(k) = {body or '0'}"

    @property
    def history(self) -> int:
        return history_length(self.terms)

    def parameters(self) -> List[Tuple[Term, float]]:
        return [(term, float(value)) for term, value in zip(self.terms, self.theta)]

    def with_theta(self, theta: npt.ArrayLike) -> "NarxModel":
        return NarxModel(
            terms=self.terms,
            theta=np.asarray(theta, dtype=float),
            n_y=self.n_y,
            n_u=self.n_u,
            tau_d=self.tau_d,
            tau_s=self.tau_s,
            sample_time=self.sample_time,
        )


def _signal_map(u: FloatArray, y: FloatArray) -> Dict[SignalKind, FloatArray]:
    phi1, phi2 = phi_arrays(u)
    return {
        SignalKind.OUTPUT: y,
        SignalKind.INPUT: u,
        SignalKind.PHI1: phi1,
        SignalKind.PHI2: phi2,
    }


def regression_start(pool: Sequence[Term]) -> int:
    """Index of the first regression row for a pool."""
    return history_length(pool)


def build_regressor_matrix(
    pool: Sequence[Term], u: Signal, y: Signal
) -> Tuple[FloatArray, FloatArray]:
    """Evaluate every pool term on measured data.

    Args:
        pool: Candidate or selected terms, one column each
        u: Measured input
        y: Measured output, same length as u

    Returns:
        Regressor matrix Psi and the matching target y[start:]
    """
    if len(u) != len(y):
        raise NumericError(f"Input and output lengths differ ({len(u)} != {len(y)})")
    start = regression_start(pool)
    n = len(y)
    if n <= start:
        raise NumericError(
            f"Data of {n} sample(s) is shorter than the maximum lag + 1 ({start + 1})"
        )
    signals = _signal_map(u.samples, y.samples)
    psi = np.empty((n - start, len(pool)), dtype=float)
    for i, term in enumerate(pool):
        psi[:, i] = evaluate_term(term, signals, start, n)
    return psi, np.array(y.samples[start:], dtype=float)


def one_step_predict(model: NarxModel, u: Signal, y: Signal) -> Signal:
    """One-step-ahead prediction from measured lagged data.

    Samples before the first computable index repeat the measured output.
    """
    psi, _ = build_regressor_matrix(model.terms, u, y)
    prediction = np.array(y.samples, dtype=float)
    prediction[model.history :] = psi @ model.theta
    return y.with_samples(prediction)


def free_run(model: NarxModel, u: Signal, y0: npt.ArrayLike) -> Signal:
    """Simulate the model feeding predicted outputs back into the regressors.

    Args:
        model: Model to simulate
        u: Input driving the model; phi terms are computed from it
        y0: n_y initial outputs, oldest first, placed right before the first
            computable index

    Returns:
        Simulated output with the same length as u
    """
    initial = np.asarray(y0, dtype=float).reshape(-1)
    if initial.size != model.n_y:
        raise NumericError(f"y0 must hold n_y={model.n_y} value(s), got {initial.size}")
    start = max(model.history, model.n_y)
    n = len(u)
    if n <= start:
        raise NumericError(f"Input of {n} sample(s) is shorter than the model history")

    y_hat: List[float] = [float(initial[0])] * n
    y_hat[start - model.n_y : start] = initial.tolist()

    signals = _signal_map(u.samples, np.zeros(n))
    exogenous: List[List[float]] = []
    feedback: List[Tuple[Tuple[int, int], ...]] = []
    for term, value in model.parameters():
        exo_term = Term(tuple(f for f in term.factors if f.kind is not SignalKind.OUTPUT))
        exogenous.append((value * evaluate_term(exo_term, signals, start, n)).tolist())
        feedback.append(
            tuple((f.lag, f.power) for f in term.factors if f.kind is SignalKind.OUTPUT)
        )

    for t in range(start, n):
        row = t - start
        acc = 0.0
        for exo, outputs in zip(exogenous, feedback):
            value = exo[row]
            for lag, power in outputs:
                value *= y_hat[t - lag] ** power
            acc += value
        if not math.isfinite(acc) or abs(acc) > DIVERGENCE_THRESHOLD:
            _LOGGER.warning("Free run diverged at sample %d", t)
            raise DivergenceError(
                f"Free run diverged at sample {t} (value {acc!r})",
                index=t,
                time_s=t * u.sample_time,
            )
        y_hat[t] = acc

    return u.with_samples(y_hat)
