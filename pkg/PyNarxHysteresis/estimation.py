"""Parameter estimation and ERR-ranked structure selection"""

from dataclasses import dataclass, field, replace
import logging
from typing import Any, Dict, List, NamedTuple, Sequence, Tuple

import numpy as np
import numpy.typing as npt
from scipy import linalg

from .const import CONDITION_WARNING, TOL_CONSTRAINT, TOL_ERR_TIE
from .exceptions import NumericError, RankDeficiencyError
from .helper import FloatArray
from .narx import NarxModel, Signal, build_regressor_matrix
from .terms import Term

_LOGGER = logging.getLogger(__name__)

_DEGENERATE_NORM = 1e-20  # squared orthogonalized norm relative to the raw column


@dataclass(frozen=True, eq=False)
class EqualityConstraint:
    """Linear equality constraints S·theta = c."""

    S: FloatArray
    c: FloatArray

    def __post_init__(self) -> None:
        s = np.atleast_2d(np.array(self.S, dtype=float))
        c = np.array(self.c, dtype=float).reshape(-1)
        if s.shape[0] != c.size:
            raise NumericError(f"S has {s.shape[0]} row(s) but c has {c.size} value(s)")
        if s.shape[0] > s.shape[1]:
            raise NumericError(
                f"More constraints ({s.shape[0]}) than parameters ({s.shape[1]})"
            )
        if s.shape[0] and np.linalg.matrix_rank(s) < s.shape[0]:
            raise NumericError("Constraint matrix S must have full row rank")
        object.__setattr__(self, "S", s)
        object.__setattr__(self, "c", c)

    @classmethod
    def empty(cls, n_theta: int) -> "EqualityConstraint":
        return cls(np.zeros((0, n_theta)), np.zeros(0))

    @property
    def n_constraints(self) -> int:
        return int(self.S.shape[0])

    def residual(self, theta: npt.ArrayLike) -> float:
        """Largest absolute constraint violation."""
        if not self.n_constraints:
            return 0.0
        return float(np.max(np.abs(self.S @ np.asarray(theta, dtype=float) - self.c)))

    def __repr__(self) -> str:
        return f"EqualityConstraint(n_constraints={self.n_constraints}, n_theta={self.S.shape[1]})"


@dataclass(frozen=True, eq=False)
class LeastSquaresResult:
    theta: FloatArray
    residual_norm: float
    condition: float
    warnings: Tuple[str, ...] = ()


class _Factorization(NamedTuple):
    q: FloatArray
    r: FloatArray
    perm: npt.NDArray[np.intp]
    scale: FloatArray
    condition: float


def _factorize(psi: FloatArray) -> _Factorization:
    """Column-equilibrated, column-pivoted QR of the regressor matrix."""
    if psi.ndim != 2 or psi.shape[1] == 0:
        raise NumericError(f"Regressor matrix must have at least one column, got {psi.shape}")
    scale = np.linalg.norm(psi, axis=0)
    zero = np.flatnonzero(scale == 0).tolist()
    if zero:
        raise RankDeficiencyError(f"Regressor column(s) {zero} are identically zero", zero)
    q, r, perm = linalg.qr(psi / scale, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    tol = max(psi.shape) * np.finfo(float).eps * diag[0]
    rank = int(np.count_nonzero(diag > tol))
    if rank < psi.shape[1]:
        dependent = sorted(int(j) for j in perm[rank:])
        raise RankDeficiencyError(
            f"Regressor matrix is rank deficient, dependent column(s) {dependent}",
            dependent,
        )
    return _Factorization(q, r, perm, scale, float(np.linalg.cond(r)))


def _unpermute(values: FloatArray, fact: _Factorization) -> FloatArray:
    theta = np.empty_like(values)
    theta[fact.perm] = values
    return theta / fact.scale


def _condition_warnings(condition: float) -> Tuple[str, ...]:
    if condition <= CONDITION_WARNING:
        return ()
    _LOGGER.warning("Regressor matrix is ill-conditioned (condition %.3e)", condition)
    return (f"condition number {condition:.3e} exceeds {CONDITION_WARNING:.0e}",)


def least_squares(psi: FloatArray, y: FloatArray) -> LeastSquaresResult:
    """Unconstrained least squares through a pivoted QR decomposition."""
    fact = _factorize(psi)
    z = linalg.solve_triangular(fact.r, fact.q.T @ y)
    theta = _unpermute(z, fact)
    return LeastSquaresResult(
        theta=theta,
        residual_norm=float(np.linalg.norm(y - psi @ theta)),
        condition=fact.condition,
        warnings=_condition_warnings(fact.condition),
    )


def constrained_least_squares(
    psi: FloatArray, y: FloatArray, con: EqualityConstraint
) -> LeastSquaresResult:
    """Least squares subject to S·theta = c.

    Corrects the unconstrained estimate along (Psi^T Psi)^-1 S^T. The inverse
    Gram matrix is applied through triangular solves with R, never formed.

    Args:
        psi: Regressor matrix
        y: Target vector
        con: Equality constraints over the columns of psi

    Returns:
        Constrained estimate; the constraint holds to 1e-10 in the max norm
    """
    if con.S.shape[1] != psi.shape[1]:
        raise NumericError(
            f"Constraint has {con.S.shape[1]} column(s), regressor matrix {psi.shape[1]}"
        )
    if not con.n_constraints:
        return least_squares(psi, y)

    fact = _factorize(psi)
    z = linalg.solve_triangular(fact.r, fact.q.T @ y)
    s_perm = (con.S / fact.scale)[:, fact.perm]
    w = linalg.solve_triangular(fact.r, s_perm.T, trans="T")
    gram = w.T @ w
    correction = linalg.solve_triangular(fact.r, w)
    try:
        gram_factor = linalg.cho_factor(gram)
    except linalg.LinAlgError as exc:
        raise NumericError("S (Psi^T Psi)^-1 S^T is singular") from exc

    # second pass is one step of iterative refinement
    for _ in range(2):
        mismatch = s_perm @ z - con.c
        z = z - correction @ linalg.cho_solve(gram_factor, mismatch)

    theta = _unpermute(z, fact)
    violation = con.residual(theta)
    if violation > TOL_CONSTRAINT * max(1.0, float(np.max(np.abs(con.c)))):
        raise NumericError(f"Constraint residual {violation:.3e} above tolerance")
    _LOGGER.debug("Constrained estimate, residual %.3e", violation)
    return LeastSquaresResult(
        theta=theta,
        residual_norm=float(np.linalg.norm(y - psi @ theta)),
        condition=fact.condition,
        warnings=_condition_warnings(fact.condition),
    )


@dataclass(frozen=True, eq=False)
class SelectionReport:
    """Terms ranked by error reduction ratio."""

    terms: Tuple[Term, ...]
    err: FloatArray
    aic: FloatArray | None = None  # AIC for model sizes 1..len(terms)
    chosen_size: int | None = None
    notes: Tuple[str, ...] = field(default=())

    def __repr__(self) -> str:
        return f"SelectionReport(terms={len(self.terms)}, chosen_size={self.chosen_size})"

    @property
    def cumulative_err(self) -> FloatArray:
        return np.cumsum(self.err)

    def selected(self) -> List[Term]:
        size = self.chosen_size if self.chosen_size is not None else len(self.terms)
        return list(self.terms[:size])

    def rows(self) -> List[Dict[str, Any]]:
        cumulative = self.cumulative_err
        return [
            {
                "term": term.label,
                "err": float(self.err[i]),
                "cumulative_err": float(cumulative[i]),
                "aic": None if self.aic is None else float(self.aic[i]),
            }
            for i, term in enumerate(self.terms)
        ]


def frols_select(
    pool: Sequence[Term], u: Signal, y: Signal, max_terms: int
) -> SelectionReport:
    """Forward regression with orthogonal least squares.

    Args:
        pool: Candidate terms
        u: Measured input
        y: Measured output
        max_terms: Number of terms to rank

    Returns:
        Report with the selected terms in selection order and their ERR
    """
    if not pool:
        raise NumericError("Candidate pool is empty")
    if max_terms < 1:
        raise NumericError(f"max_terms must be >= 1, got {max_terms}")

    psi, target = build_regressor_matrix(pool, u, y)
    yty = float(target @ target)
    if yty == 0.0:
        raise NumericError("Target output is identically zero")

    candidates = psi.copy()
    raw_norms = np.einsum("ij,ij->j", psi, psi)
    available = list(range(len(pool)))
    chosen: List[int] = []
    errs: List[float] = []
    notes: List[str] = []

    while available and len(chosen) < max_terms:
        block = candidates[:, available]
        sq = np.einsum("ij,ij->j", block, block)
        degenerate = sq <= _DEGENERATE_NORM * raw_norms[available]
        if np.any(degenerate):
            for j in np.asarray(available)[degenerate]:
                note = f"skipped degenerate candidate {pool[j].label}"
                _LOGGER.debug("FROLS %s", note)
                notes.append(note)
            available = [j for j, bad in zip(available, degenerate) if not bad]
            continue

        err = (block.T @ target) ** 2 / (sq * yty)
        best = float(np.max(err))
        tied = [j for j, e in zip(available, err) if e >= best - TOL_ERR_TIE * best]
        pick = min(tied, key=lambda j: pool[j].sort_key)
        position = available.index(pick)
        w = candidates[:, pick].copy()
        available.pop(position)
        chosen.append(pick)
        errs.append(float(err[position]))
        _LOGGER.debug("FROLS step %d: %s (ERR %.6g)", len(chosen), pool[pick].label, err[position])

        if available:
            coeffs = (w @ candidates[:, available]) / (w @ w)
            candidates[:, available] -= np.outer(w, coeffs)

    _LOGGER.info(
        "Selected %d term(s), cumulative ERR %.6f", len(chosen), float(np.sum(errs))
    )
    return SelectionReport(
        terms=tuple(pool[j] for j in chosen),
        err=np.asarray(errs, dtype=float),
        notes=tuple(notes),
    )


def compute_aic(report: SelectionReport, u: Signal, y: Signal) -> FloatArray:
    """Plain AIC N·ln(sigma^2) + 2n for the nested models of a report."""
    psi, target = build_regressor_matrix(report.terms, u, y)
    n_rows = target.size
    floor = np.finfo(float).eps * float(target @ target) / n_rows
    values = np.empty(len(report.terms), dtype=float)
    for size in range(1, len(report.terms) + 1):
        fit = least_squares(psi[:, :size], target)
        variance = max(fit.residual_norm**2 / n_rows, floor)
        values[size - 1] = n_rows * np.log(variance) + 2 * size
    return values


def _minimum_aic_size(values: FloatArray) -> Tuple[int, str | None]:
    size = int(np.argmin(values)) + 1
    note = None
    if size == len(values) > 1 and values[-1] < values[-2]:
        note = f"AIC still decreasing at the largest size ({size}); consider a larger max_terms"
        _LOGGER.warning("%s", note)
    _LOGGER.info("AIC selects %d of %d term(s)", size, len(values))
    return size, note


def aic_choose_size(report: SelectionReport, u: Signal, y: Signal) -> int:
    """Number of leading report terms minimizing AIC."""
    if not report.terms:
        raise NumericError("Selection report has no terms")
    return _minimum_aic_size(compute_aic(report, u, y))[0]


def with_aic(report: SelectionReport, u: Signal, y: Signal) -> SelectionReport:
    """Copy of a report carrying AIC values and the chosen size.

    A minimum at the largest size is recorded in the report notes.
    """
    if not report.terms:
        raise NumericError("Selection report has no terms")
    values = compute_aic(report, u, y)
    size, note = _minimum_aic_size(values)
    notes = report.notes if note is None else report.notes + (note,)
    return replace(report, aic=values, chosen_size=size, notes=notes)


def fit_model(
    terms: Sequence[Term],
    u: Signal,
    y: Signal,
    *,
    n_y: int,
    n_u: int,
    tau_d: int = 1,
    tau_s: int = 0,
    constraint: EqualityConstraint | None = None,
) -> NarxModel:
    """Estimate the parameters of a fixed structure."""
    psi, target = build_regressor_matrix(terms, u, y)
    if constraint is None:
        result = least_squares(psi, target)
    else:
        result = constrained_least_squares(psi, target, constraint)
    return NarxModel(
        terms=tuple(terms),
        theta=result.theta,
        n_y=n_y,
        n_u=n_u,
        tau_d=tau_d,
        tau_s=tau_s,
        sample_time=u.sample_time,
    )
