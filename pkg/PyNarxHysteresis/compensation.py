"""Feedforward hysteresis compensators synthesized from identified NARX models"""

from dataclasses import dataclass, field
import logging
import math
from typing import Dict, List, Protocol, Tuple, runtime_checkable

import numpy as np
import numpy.typing as npt

from .const import DIVERGENCE_THRESHOLD, TOL_DENOMINATOR
from .exceptions import CausalityError, DivergenceError, NumericError, StructuralError
from .helper import FloatArray, phi_arrays, smooth_quadratic
from .metrics import summarize
from .narx import NarxModel, Signal
from .terms import LaggedFactor, Term
from .types import LawKind, LawSignalKind, MetricsSummary, SignalKind

_LOGGER = logging.getLogger(__name__)

_LAW_ORDER: Dict[LawSignalKind, int] = {kind: i for i, kind in enumerate(LawSignalKind)}

# model factor kind -> law factor kind, direct laws (u becomes m, y becomes r)
_DIRECT_KINDS: Dict[SignalKind, LawSignalKind] = {
    SignalKind.OUTPUT: LawSignalKind.REFERENCE,
    SignalKind.INPUT: LawSignalKind.COMPENSATION,
    SignalKind.PHI1: LawSignalKind.COMPENSATION_DIFF,
    SignalKind.PHI2: LawSignalKind.COMPENSATION_SIGN,
}

# inverse laws (model output is m, model input is the shifted r)
_INVERSE_KINDS: Dict[SignalKind, LawSignalKind] = {
    SignalKind.OUTPUT: LawSignalKind.COMPENSATION,
    SignalKind.INPUT: LawSignalKind.REFERENCE,
    SignalKind.PHI1: LawSignalKind.REFERENCE_DIFF,
    SignalKind.PHI2: LawSignalKind.REFERENCE_SIGN,
}


@runtime_checkable
class SupportsPlant(Protocol):
    """Protocol for a plant driven by a sampled input."""

    def respond(self, u: Signal) -> Signal:
        ...


@dataclass(frozen=True)
class LawFactor:
    """Lagged or advanced law signal, offset relative to the computed sample j."""

    kind: LawSignalKind
    offset: int
    power: int = 1

    def __post_init__(self) -> None:
        if self.power < 1:
            raise StructuralError(f"Non-positive power {self.power} for {self.kind.value}")
        if self.kind.reads_compensation and self.offset > -1:
            raise CausalityError(
                f"Law factor {self.label} reads a compensation sample not yet computed"
            )

    @property
    def label(self) -> str:
        offset = f"j+{self.offset}" if self.offset > 0 else f"j{self.offset}" if self.offset else "j"
        power = f"^{self.power}" if self.power > 1 else ""
        return f"{self.kind.value}({offset}){power}"

    @property
    def earliest(self) -> int:
        """First j at which every sample the factor reads exists."""
        return (1 if self.kind.is_difference else 0) - self.offset


@dataclass(frozen=True)
class LawTerm:
    coefficient: float
    factors: Tuple[LawFactor, ...] = field(default=())

    def __post_init__(self) -> None:
        ordered = tuple(sorted(self.factors, key=lambda f: (_LAW_ORDER[f.kind], f.offset)))
        object.__setattr__(self, "factors", ordered)

    @property
    def label(self) -> str:
        return "*".join(f.label for f in self.factors) or "1"


@dataclass(frozen=True, eq=False)
class CompensatorLaw:
    """Recurrence m[j] = gain * sum(coefficient * product of factors)."""

    kind: LawKind
    terms: Tuple[LawTerm, ...]
    gain: float
    horizon: int  # future reference samples read by the law

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple(self.terms))
        if not math.isfinite(self.gain):
            raise NumericError("Law gain must be finite")
        reads = [
            f.offset
            for t in self.terms
            for f in t.factors
            if not f.kind.reads_compensation
        ]
        if max(reads, default=0) > self.horizon:
            raise CausalityError(
                f"Law reads reference samples beyond its horizon {self.horizon}"
            )

    def __repr__(self) -> str:
        return (
            f"CompensatorLaw(kind={self.kind.value}, terms={len(self.terms)}, "
            f"gain={self.gain!r}, horizon={self.horizon})"
        )

    def __str__(self) -> str:
        body = " + ".join(f"{t.coefficient!r}*{t.label}" for t in self.terms)
        return f"m(j) = {self.gain!r} * [{body or '0'}]"

    @property
    def start_index(self) -> int:
        """First sample computed by the recurrence; earlier samples are seeds."""
        return max([0, *(f.earliest for t in self.terms for f in t.factors)])

    def coefficients(self) -> Dict[str, float]:
        """Scaled coefficient of every law term keyed by its label."""
        result: Dict[str, float] = {}
        for term in self.terms:
            result[term.label] = result.get(term.label, 0.0) + self.gain * term.coefficient
        return result


@dataclass(frozen=True, eq=False)
class DirectDecomposition:
    """Direct model split as A(q) y = b u(k - tau_d) + B*(q) u + f.

    A linear phi1 term at lag tau_d counts toward b together with the
    matching -b u(k - tau_d - 1) contribution.
    """

    a_terms: Tuple[Tuple[Term, float], ...]  # linear y(k-i)
    b_terms: Tuple[Tuple[Term, float], ...]  # linear u or phi1 at lag tau_d
    b_star_terms: Tuple[Tuple[Term, float], ...]  # linear u(k-i), i > tau_d
    f_terms: Tuple[Tuple[Term, float], ...]  # everything else
    tau_d: int
    n_y: int
    n_u: int
    sample_time: float | None = None

    @property
    def a_coeffs(self) -> FloatArray:
        coeffs = np.zeros(self.n_y, dtype=float)
        for term, value in self.a_terms:
            coeffs[term.factors[0].lag - 1] += value
        return coeffs

    @property
    def b_taud(self) -> float:
        return float(sum(value for _, value in self.b_terms))

    @property
    def b_star_coeffs(self) -> FloatArray:
        coeffs = np.zeros(max(self.n_u - self.tau_d, 0), dtype=float)
        for term, value in self.b_star_terms:
            coeffs[term.factors[0].lag - self.tau_d - 1] += value
        return coeffs


def _input_derived(term: Term) -> List[LaggedFactor]:
    return [f for f in term.factors if f.kind is not SignalKind.OUTPUT]


def decompose_direct(model: NarxModel) -> DirectDecomposition:
    """Partition a direct model into A(q), b, B*(q) and the nonlinear part f."""
    tau_d = model.tau_d
    a_terms: List[Tuple[Term, float]] = []
    b_terms: List[Tuple[Term, float]] = []
    b_star_terms: List[Tuple[Term, float]] = []
    f_terms: List[Tuple[Term, float]] = []
    early: List[str] = []
    nonlinear: List[str] = []

    for term, value in model.parameters():
        inputs = _input_derived(term)
        if any(f.lag < tau_d for f in inputs):
            early.append(term.label)
            continue
        touches = any(f.lag == tau_d for f in inputs)
        only = term.factors[0] if len(term.factors) == 1 else None
        if touches:
            if (
                only is not None
                and only.power == 1
                and only.kind in (SignalKind.INPUT, SignalKind.PHI1)
            ):
                b_terms.append((term, value))
            else:
                nonlinear.append(term.label)
        elif term.is_linear_output:
            a_terms.append((term, value))
        elif only is not None and only.kind is SignalKind.INPUT and only.power == 1:
            b_star_terms.append((term, value))
        else:
            f_terms.append((term, value))

    if early:
        raise CausalityError(
            f"Terms read the input less than tau_d={tau_d} samples back: {', '.join(early)}",
            offending_terms=early,
        )
    if nonlinear:
        raise StructuralError(
            f"Input at lag tau_d={tau_d} appears nonlinearly: {', '.join(nonlinear)}",
            offending_terms=nonlinear,
        )
    decomposition = DirectDecomposition(
        a_terms=tuple(a_terms),
        b_terms=tuple(b_terms),
        b_star_terms=tuple(b_star_terms),
        f_terms=tuple(f_terms),
        tau_d=tau_d,
        n_y=model.n_y,
        n_u=model.n_u,
        sample_time=model.sample_time,
    )
    if abs(decomposition.b_taud) <= TOL_DENOMINATOR:
        raise StructuralError(
            f"No usable linear input term at lag tau_d={tau_d} (b = {decomposition.b_taud!r})"
        )
    if model.n_u <= tau_d:
        _LOGGER.info("n_u=%d does not exceed tau_d=%d", model.n_u, tau_d)
    return decomposition


def reassemble_direct(decomposition: DirectDecomposition) -> NarxModel:
    pairs = (
        decomposition.a_terms
        + decomposition.b_terms
        + decomposition.b_star_terms
        + decomposition.f_terms
    )
    return NarxModel(
        terms=tuple(term for term, _ in pairs),
        theta=np.array([value for _, value in pairs], dtype=float),
        n_y=decomposition.n_y,
        n_u=decomposition.n_u,
        tau_d=decomposition.tau_d,
        sample_time=decomposition.sample_time,
    )


def _substitute(
    term: Term, kinds: Dict[SignalKind, LawSignalKind], shift: Dict[SignalKind, int]
) -> Tuple[LawFactor, ...]:
    return tuple(
        LawFactor(kinds[f.kind], shift[f.kind] - f.lag, f.power) for f in term.factors
    )


def synthesize_direct(model: NarxModel) -> CompensatorLaw:
    """Rearrange a direct model for the input at lag tau_d.

    With j = k - tau_d the model reads
    r(j+tau_d) = b m(j) + B*(q) m + f(...) + sum a_i r(j+tau_d-i),
    solved for m(j). Output lags become reference samples, input lags
    become past compensation samples.
    """
    dec = decompose_direct(model)
    tau_d = dec.tau_d
    shift = {kind: tau_d for kind in SignalKind}
    terms: List[LawTerm] = [LawTerm(1.0, (LawFactor(LawSignalKind.REFERENCE, tau_d),))]
    for term, value in dec.a_terms + dec.b_star_terms + dec.f_terms:
        terms.append(LawTerm(-value, _substitute(term, _DIRECT_KINDS, shift)))
    for term, value in dec.b_terms:
        if term.factors[0].kind is SignalKind.PHI1:
            terms.append(LawTerm(value, (LawFactor(LawSignalKind.COMPENSATION, -1),)))
    law = CompensatorLaw(
        kind=LawKind.DIRECT, terms=tuple(terms), gain=1.0 / dec.b_taud, horizon=tau_d
    )
    _LOGGER.debug("Direct law: %d term(s), horizon %d", len(law.terms), law.horizon)
    return law


def shift_for_inverse(
    u: Signal,
    y: Signal,
    tau_s: int,
    tau_d: int = 1,
    smoothing_window: int | None = None,
) -> Tuple[Signal, Signal]:
    """Dataset for inverse identification: input y advanced by tau_s, target u.

    Returns:
        (x, target) with x[k] = y[k + tau_s] and target[k] = u[k]
    """
    if tau_s < tau_d + 1:
        raise CausalityError(f"tau_s must be >= tau_d + 1 = {tau_d + 1}, got {tau_s}")
    if len(u) != len(y):
        raise NumericError(f"Input and output lengths differ ({len(u)} != {len(y)})")
    if len(y) <= tau_s + 1:
        raise NumericError(f"Data of {len(y)} sample(s) is too short for tau_s={tau_s}")
    values = np.asarray(y.samples)
    if smoothing_window is not None:
        values = smooth_quadratic(values, smoothing_window)
    return (
        y.with_samples(values[tau_s:]),
        u.with_samples(u.samples[: len(u) - tau_s]),
    )


def synthesize_inverse(inverse_model: NarxModel) -> CompensatorLaw:
    """Substitute m for the model output and the advanced reference for its input."""
    if not any(_input_derived(term) for term in inverse_model.terms):
        raise StructuralError(
            "Inverse model has no regressor of the plant output",
            offending_terms=[t.label for t in inverse_model.terms],
        )
    shift = {
        SignalKind.OUTPUT: 0,
        SignalKind.INPUT: inverse_model.tau_s,
        SignalKind.PHI1: inverse_model.tau_s,
        SignalKind.PHI2: inverse_model.tau_s,
    }
    terms = tuple(
        LawTerm(value, _substitute(term, _INVERSE_KINDS, shift))
        for term, value in inverse_model.parameters()
    )
    horizon = max(
        (f.offset for t in terms for f in t.factors if not f.kind.reads_compensation),
        default=0,
    )
    law = CompensatorLaw(kind=LawKind.INVERSE, terms=terms, gain=1.0, horizon=max(horizon, 0))
    _LOGGER.debug("Inverse law: %d term(s), horizon %d", len(law.terms), law.horizon)
    return law


def _seeds(m0: npt.ArrayLike | float | None, r: Signal, count: int) -> List[float]:
    if m0 is None:
        return [float(r.samples[0])] * count
    seeds = np.asarray(m0, dtype=float).reshape(-1)
    if seeds.size == 1:
        return [float(seeds[0])] * count
    if seeds.size != count:
        raise NumericError(f"m0 must hold 1 or {count} value(s), got {seeds.size}")
    return seeds.tolist()


def run_compensator(
    law: CompensatorLaw, r: Signal, m0: npt.ArrayLike | float | None = None
) -> Signal:
    """Evaluate a compensator law along a reference.

    Args:
        law: Compensator recurrence
        r: Reference signal
        m0: Seed for the samples before the law's start index; a scalar is
            repeated, the default is r[0]

    Returns:
        Compensation signal of len(r) - horizon samples
    """
    n = len(r) - law.horizon
    start = law.start_index
    if n <= start:
        raise NumericError(
            f"Reference of {len(r)} sample(s) is shorter than the law horizon "
            f"{law.horizon} plus its start index {start}"
        )
    ref = np.asarray(r.samples)
    dr, sr = phi_arrays(ref)
    reference_values = {
        LawSignalKind.REFERENCE: ref.tolist(),
        LawSignalKind.REFERENCE_DIFF: dr.tolist(),
        LawSignalKind.REFERENCE_SIGN: sr.tolist(),
    }
    compiled = [
        (term.coefficient, [(f.kind, f.offset, f.power) for f in term.factors])
        for term in law.terms
    ]

    m: List[float] = [0.0] * n
    m[:start] = _seeds(m0, r, start)
    gain = law.gain
    for j in range(start, n):
        acc = 0.0
        for coefficient, factors in compiled:
            value = coefficient
            for kind, offset, power in factors:
                index = j + offset
                if kind is LawSignalKind.COMPENSATION:
                    x = m[index]
                elif kind is LawSignalKind.COMPENSATION_DIFF:
                    x = m[index] - m[index - 1]
                elif kind is LawSignalKind.COMPENSATION_SIGN:
                    delta = m[index] - m[index - 1]
                    x = float((delta > 0) - (delta < 0))
                else:
                    x = reference_values[kind][index]
                value *= x if power == 1 else x**power
            acc += value
        acc *= gain
        if not math.isfinite(acc) or abs(acc) > DIVERGENCE_THRESHOLD:
            _LOGGER.warning("Compensator diverged at sample %d", j)
            raise DivergenceError(
                f"Compensator diverged at sample {j} (value {acc!r})",
                index=j,
                time_s=j * r.sample_time,
            )
        m[j] = acc
    return r.with_samples(m)


@dataclass(frozen=True, eq=False)
class ChainResult:
    """Compensator output, plant response and tracking metrics."""

    reference: Signal  # trimmed to the compensation length
    m: Signal
    y: Signal
    metrics: MetricsSummary
    baseline: MetricsSummary | None = None  # m = r

    @property
    def mape(self) -> float:
        return self.metrics["mape"]

    @property
    def nsavi(self) -> float:
        return self.metrics["nsavi"]


def evaluate_chain(
    law: CompensatorLaw | None,
    plant: SupportsPlant,
    r: Signal,
    *,
    m0: npt.ArrayLike | float | None = None,
    transient_skip: int = 0,
    pointwise: bool = False,
    epsilon: float | None = None,
    with_baseline: bool = False,
) -> ChainResult:
    """Drive the plant with the compensator output and score it against r.

    A missing law evaluates the uncompensated chain m = r.
    """
    m = r if law is None else run_compensator(law, r, m0)
    reference = r.window(0, len(m))
    y = plant.respond(m)
    metrics = summarize(
        reference, y, m, transient_skip=transient_skip, pointwise=pointwise, epsilon=epsilon
    )
    baseline = None
    if with_baseline:
        baseline = (
            metrics
            if law is None
            else summarize(
                reference,
                plant.respond(reference),
                reference,
                transient_skip=transient_skip,
                pointwise=pointwise,
                epsilon=epsilon,
            )
        )
    _LOGGER.info("Chain MAPE %.4f %%, NSAVI %.4f", metrics["mape"], metrics["nsavi"])
    return ChainResult(reference=reference, m=m, y=y, metrics=metrics, baseline=baseline)

