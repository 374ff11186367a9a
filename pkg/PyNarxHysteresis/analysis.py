"""Steady-state and quasi-static analysis of hysteretic NARX models"""

from dataclasses import dataclass
import logging
from typing import Iterable, List, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from .const import TOL_DENOMINATOR, TOL_EQ
from .estimation import EqualityConstraint
from .exceptions import StructuralError
from .helper import FloatArray
from .narx import NarxModel, Signal
from .terms import FULL_EXCLUSIONS, Term, violated_rule
from .types import Branch, SignalKind, SteadyStateClass

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class SteadyStateReport:
    sigma_y: float  # sum of the linear output parameters
    classification: SteadyStateClass


@dataclass(frozen=True, eq=False)
class QuasiStaticCurve:
    """Quasi-static output of one branch over an input grid.

    Points where the branch is singular carry NaN in ``y_tilde``.
    """

    branch: Branch
    u_grid: FloatArray
    y_tilde: FloatArray
    attracting: npt.NDArray[np.bool_]
    phi1_value: float

    def __post_init__(self) -> None:
        if not len(self.u_grid) == len(self.y_tilde) == len(self.attracting):
            raise ValueError("Quasi-static curve arrays must have equal length")

    def __repr__(self) -> str:
        return (
            f"QuasiStaticCurve(branch={self.branch.value}, points={len(self.u_grid)}, "
            f"phi1={self.phi1_value})"
        )

    @property
    def defined(self) -> npt.NDArray[np.bool_]:
        return np.isfinite(self.y_tilde)


def sum_linear_output_params(model: NarxModel) -> float:
    return float(
        sum(value for term, value in model.parameters() if term.is_linear_output)
    )


def build_continuum_constraint(structure: Sequence[Term]) -> EqualityConstraint:
    """Constraint forcing the linear output parameters to sum to one."""
    row = np.array([1.0 if t.is_linear_output else 0.0 for t in structure])
    if not row.any():
        raise StructuralError(
            "Structure has no linear output term; the continuum constraint does not apply",
            offending_terms=[t.label for t in structure],
        )
    return EqualityConstraint(row.reshape(1, -1), np.array([1.0]))


def assumption_violations(terms: Iterable[Term]) -> List[str]:
    """Labels of terms that break the hysteresis regressor assumptions."""
    return [t.label for t in terms if violated_rule(t, FULL_EXCLUSIONS) is not None]


def classify_sigma(sigma_y: float, tol: float = TOL_EQ) -> SteadyStateClass:
    if abs(sigma_y - 1.0) <= tol:
        return SteadyStateClass.CONTINUUM
    if abs(sigma_y) > 1.0 + tol:
        return SteadyStateClass.DIVERGING
    # |sigma_y| < 1 - tol, or sigma_y within tol of -1 (only ybar = 0 remains)
    return SteadyStateClass.SINGLE_FIXED_POINT


def steady_state_analyze(model: NarxModel, tol: float = TOL_EQ) -> SteadyStateReport:
    offending = assumption_violations(model.terms)
    if offending:
        raise StructuralError(
            f"Model violates the hysteresis regressor assumptions: {', '.join(offending)}",
            offending_terms=offending,
        )
    sigma_y = sum_linear_output_params(model)
    report = SteadyStateReport(sigma_y=sigma_y, classification=classify_sigma(sigma_y, tol))
    _LOGGER.info("Sigma_y = %.12g (%s)", sigma_y, report.classification.value)
    return report


def _require_affine(model: NarxModel) -> None:
    offending = [
        t.label for t in model.terms if t.power_of(SignalKind.OUTPUT) > 1
    ]
    if offending:
        raise StructuralError(
            f"Model is not affine in the quasi-static output: {', '.join(offending)}",
            offending_terms=offending,
        )


def _exogenous_value(term: Term, u: float, phi1: float, phi2: float) -> float:
    value = 1.0
    for factor in term.factors:
        if factor.kind is SignalKind.INPUT:
            value *= u**factor.power
        elif factor.kind is SignalKind.PHI1:
            value *= phi1**factor.power
        elif factor.kind is SignalKind.PHI2:
            value *= phi2**factor.power
    return value


def _quasi_static_parts(
    model: NarxModel, u: float, phi1: float, phi2: float
) -> Tuple[float, FloatArray]:
    """Constant part and per-lag output coefficients with u, phi1, phi2 frozen."""
    constant = 0.0
    by_lag = np.zeros(model.n_y, dtype=float)
    for term, theta in model.parameters():
        value = theta * _exogenous_value(term, u, phi1, phi2)
        outputs = [f for f in term.factors if f.kind is SignalKind.OUTPUT]
        if outputs:
            by_lag[outputs[0].lag - 1] += value
        else:
            constant += value
    return constant, by_lag


def attracting_test(model: NarxModel, u: float, phi1: float, branch: Branch) -> bool:
    """True when the output Jacobian companion matrix has spectral radius < 1."""
    _require_affine(model)
    _, by_lag = _quasi_static_parts(model, u, phi1, branch.phi2)
    if model.n_y == 1:
        return bool(abs(by_lag[0]) < 1.0)
    companion = np.zeros((model.n_y, model.n_y), dtype=float)
    companion[0, :] = by_lag
    companion[1:, :-1] = np.eye(model.n_y - 1)
    return bool(np.max(np.abs(np.linalg.eigvals(companion))) < 1.0)


def quasi_static_solve(
    model: NarxModel, u_grid: npt.ArrayLike, phi1: float, branch: Branch
) -> QuasiStaticCurve:
    """Quasi-static branch obtained by setting every output lag to one value.

    Args:
        model: Model affine in its output regressors
        u_grid: Input values to solve at
        phi1: Frozen input increment; its sign should match the branch
        branch: Loading (phi2 = +1) or unloading (phi2 = -1)

    Returns:
        Curve with NaN where the branch denominator vanishes
    """
    _require_affine(model)
    grid = np.asarray(u_grid, dtype=float).reshape(-1)
    y_tilde = np.full(grid.shape, np.nan)
    attracting = np.zeros(grid.shape, dtype=bool)
    for i, u in enumerate(grid):
        constant, by_lag = _quasi_static_parts(model, float(u), phi1, branch.phi2)
        denominator = 1.0 - float(np.sum(by_lag))
        if abs(denominator) < TOL_DENOMINATOR:
            continue
        y_tilde[i] = constant / denominator
        attracting[i] = attracting_test(model, float(u), phi1, branch)
    undefined = int(np.count_nonzero(np.isnan(y_tilde)))
    if undefined:
        _LOGGER.warning(
            "%s branch undefined at %d of %d grid point(s)",
            branch.value,
            undefined,
            grid.size,
        )
    return QuasiStaticCurve(
        branch=branch,
        u_grid=grid,
        y_tilde=y_tilde,
        attracting=attracting,
        phi1_value=float(phi1),
    )


def representative_phi1(u: Signal) -> float:
    """Mean absolute increment of a driving signal."""
    return float(np.mean(np.abs(np.diff(u.samples))))
