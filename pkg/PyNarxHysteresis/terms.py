"""Polynomial NARX regressors over lagged y, u, phi1 and phi2"""

from dataclasses import dataclass, field
import itertools
import logging
import re
from typing import Dict, FrozenSet, Iterable, List, Mapping, Sequence, Tuple

import numpy as np

from .exceptions import ConfigError, StructuralError
from .helper import FloatArray
from .types import ExclusionRule, SignalKind

_LOGGER = logging.getLogger(__name__)

FULL_EXCLUSIONS: FrozenSet[ExclusionRule] = frozenset(
    {
        ExclusionRule.OUTPUT_POWER,
        ExclusionRule.PHI2_POWER,
        ExclusionRule.OUTPUT_INPUT_CROSS,
    }
)

_FACTOR_PATTERN = re.compile(r"^(y|u|phi1|phi2)\(k(?:-(\d+))?\)(?:\^(\d+))?$")


@dataclass(frozen=True)
class LaggedFactor:
    """One lagged signal raised to a positive power."""

    kind: SignalKind
    lag: int
    power: int = 1

    def __post_init__(self) -> None:
        if self.lag < 0:
            raise StructuralError(f"Negative lag {self.lag} for {self.kind.value}")
        if self.kind is SignalKind.OUTPUT and self.lag < 1:
            raise StructuralError("Output factors need lag >= 1")
        if self.power < 1:
            raise StructuralError(f"Non-positive power {self.power} for {self.kind.value}")

    @property
    def sort_key(self) -> Tuple[int, int, int]:
        return (self.kind.order, self.lag, self.power)

    @property
    def history(self) -> int:
        """Samples of past data needed before the factor is defined."""
        return self.lag + 1 if self.kind.is_phi else self.lag

    @property
    def label(self) -> str:
        lag = f"k-{self.lag}" if self.lag else "k"
        power = f"^{self.power}" if self.power > 1 else ""
        return f"{self.kind.value}({lag}){power}"

    def __repr__(self) -> str:
        return f"LaggedFactor({self.label})"


def canonicalize(factors: Iterable[LaggedFactor]) -> Tuple[LaggedFactor, ...]:
    """Sort factors by kind and lag, merging repeated (kind, lag) pairs."""
    powers: Dict[Tuple[SignalKind, int], int] = {}
    for factor in factors:
        key = (factor.kind, factor.lag)
        powers[key] = powers.get(key, 0) + factor.power
    merged = [LaggedFactor(kind, lag, power) for (kind, lag), power in powers.items()]
    return tuple(sorted(merged, key=lambda f: f.sort_key))


@dataclass(frozen=True)
class Term:
    """Product of lagged factors; no factors is the constant term."""

    factors: Tuple[LaggedFactor, ...] = field(default=())

    def __post_init__(self) -> None:
        object.__setattr__(self, "factors", canonicalize(self.factors))

    @classmethod
    def of(cls, *factors: LaggedFactor) -> "Term":
        return cls(tuple(factors))

    @property
    def degree(self) -> int:
        return sum(f.power for f in self.factors)

    @property
    def is_constant(self) -> bool:
        return not self.factors

    @property
    def is_linear_output(self) -> bool:
        return (
            len(self.factors) == 1
            and self.factors[0].kind is SignalKind.OUTPUT
            and self.factors[0].power == 1
        )

    @property
    def sort_key(self) -> Tuple[int, Tuple[Tuple[int, int, int], ...]]:
        return (self.degree, tuple(f.sort_key for f in self.factors))

    @property
    def history(self) -> int:
        return max((f.history for f in self.factors), default=0)

    @property
    def max_lag(self) -> int:
        return max((f.lag for f in self.factors), default=0)

    @property
    def label(self) -> str:
        if self.is_constant:
            return "1"
        return "*".join(f.label for f in self.factors)

    def power_of(self, kind: SignalKind) -> int:
        """Total power carried by factors of one signal kind."""
        return sum(f.power for f in self.factors if f.kind is kind)

    def has_kind(self, kind: SignalKind) -> bool:
        return any(f.kind is kind for f in self.factors)

    def __str__(self) -> str:
        return self.label

    def __repr__(self) -> str:
        return f"Term({self.label})"


def format_term(term: Term) -> str:
    return term.label


def parse_term(label: str) -> Term:
    """Parse a label such as ``y(k-1)*u(k-2)^2*phi1(k-2)``; ``1`` is the constant."""
    text = label.replace(" ", "")
    if text == "1":
        return Term()
    factors: List[LaggedFactor] = []
    for part in text.split("*"):
        match = _FACTOR_PATTERN.match(part)
        if match is None:
            raise ConfigError(f"Cannot parse term factor '{part}' in '{label}'")
        kind, lag, power = match.groups()
        factors.append(
            LaggedFactor(SignalKind(kind), int(lag or 0), int(power or 1))
        )
    return Term(tuple(factors))


def history_length(terms: Sequence[Term]) -> int:
    """First sample index at which every term is defined."""
    return max((t.history for t in terms), default=0)


def _touches_delay(term: Term, tau_d: int) -> bool:
    return any(
        f.kind is not SignalKind.OUTPUT and f.lag == tau_d for f in term.factors
    )


def violated_rule(
    term: Term, rules: Iterable[ExclusionRule], tau_d: int = 1
) -> ExclusionRule | None:
    """Return the first exclusion rule a term matches, if any."""
    for rule in rules:
        if rule is ExclusionRule.OUTPUT_POWER:
            if term.power_of(SignalKind.OUTPUT) > 1 and not term.has_kind(
                SignalKind.INPUT
            ):
                return rule
        elif rule is ExclusionRule.PHI2_POWER:
            if any(f.kind is SignalKind.PHI2 and f.power > 1 for f in term.factors):
                return rule
        elif rule is ExclusionRule.OUTPUT_INPUT_CROSS:
            if (
                term.has_kind(SignalKind.OUTPUT)
                and term.has_kind(SignalKind.INPUT)
                and not term.has_kind(SignalKind.PHI1)
                and not term.has_kind(SignalKind.PHI2)
            ):
                return rule
        elif rule is ExclusionRule.DELAY_NONLINEAR:
            if any(
                f.kind is not SignalKind.OUTPUT and f.lag < tau_d for f in term.factors
            ):
                return rule
            if _touches_delay(term, tau_d) and not (
                term.degree == 1
                and term.factors[0].kind in (SignalKind.INPUT, SignalKind.PHI1)
            ):
                return rule
    return None


def generate_term_pool(
    ell: int,
    n_y: int,
    n_u: int,
    exclusions: Iterable[ExclusionRule] = FULL_EXCLUSIONS,
    tau_d: int = 1,
) -> List[Term]:
    """Enumerate every candidate term of degree <= ell.

    Args:
        ell: Maximum total degree
        n_y: Largest output lag
        n_u: Largest input lag, also used for phi1 and phi2
        exclusions: Rules removing terms that break the hysteresis assumptions
        tau_d: Pure delay used by the delay rule

    Returns:
        Canonical terms ordered by degree, then factor order
    """
    if ell < 1:
        raise ConfigError(f"Pool degree must be >= 1, got {ell}", key_path="pool.ell")
    if n_y < 1 or n_u < 1:
        raise ConfigError(f"Pool lags must be >= 1, got n_y={n_y}, n_u={n_u}")

    variables = [LaggedFactor(SignalKind.OUTPUT, j) for j in range(1, n_y + 1)]
    for kind in (SignalKind.INPUT, SignalKind.PHI1, SignalKind.PHI2):
        variables.extend(LaggedFactor(kind, j) for j in range(1, n_u + 1))

    rules = tuple(sorted(set(exclusions), key=lambda r: r.value))
    pool: List[Term] = []
    dropped = 0
    for degree in range(ell + 1):
        for combo in itertools.combinations_with_replacement(variables, degree):
            term = Term(combo)
            if violated_rule(term, rules, tau_d) is None:
                pool.append(term)
            else:
                dropped += 1

    pool.sort(key=lambda t: t.sort_key)
    _LOGGER.debug(
        "Generated pool of %d term(s) (ell=%d, n_y=%d, n_u=%d), %d excluded",
        len(pool),
        ell,
        n_y,
        n_u,
        dropped,
    )
    return pool


def evaluate_term(
    term: Term, signals: Mapping[SignalKind, FloatArray], start: int, stop: int
) -> FloatArray:
    """Values of a term at rows start..stop-1."""
    column = np.ones(stop - start, dtype=float)
    for factor in term.factors:
        values = signals[factor.kind][start - factor.lag : stop - factor.lag]
        column *= values if factor.power == 1 else values**factor.power
    return column
