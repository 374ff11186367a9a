"""Tracking metrics"""

import logging
from typing import Tuple

import numpy as np

from .exceptions import NumericError
from .helper import FloatArray
from .narx import Signal
from .types import MetricsSummary

_LOGGER = logging.getLogger(__name__)


def _retained(a: Signal, b: Signal, transient_skip: int) -> Tuple[FloatArray, FloatArray]:
    if len(a) != len(b):
        raise NumericError(f"Signal lengths differ ({len(a)} != {len(b)})")
    if transient_skip < 0 or transient_skip >= len(a):
        raise NumericError(
            f"Transient skip {transient_skip} leaves no samples out of {len(a)}"
        )
    return np.asarray(a.samples[transient_skip:]), np.asarray(b.samples[transient_skip:])


def mape(reference: Signal, actual: Signal, transient_skip: int = 0) -> float:
    """Mean absolute error in percent of the reference range.

    Args:
        reference: Signal defining the range, e.g. the measured output
        actual: Signal compared against it
        transient_skip: Leading samples left out of both signals

    Returns:
        100 * sum|reference - actual| / (N * (max(reference) - min(reference)))
    """
    ref, act = _retained(reference, actual, transient_skip)
    span = float(np.ptp(ref))
    if span == 0.0:
        raise NumericError("Reference has zero range; MAPE is undefined")
    return 100.0 * float(np.sum(np.abs(ref - act))) / (ref.size * span)


def nsavi(
    m: Signal,
    r: Signal,
    transient_skip: int = 0,
    pointwise: bool = False,
    epsilon: float | None = None,
) -> float:
    """Normalized sum of the absolute variation of the compensation input.

    The default is sum|dm| / sum|dr|. With pointwise=True the mean of the
    increment ratios |dm|/|dr| is returned instead; increments with
    |dr| <= epsilon are skipped when epsilon is given.
    """
    m_w, r_w = _retained(m, r, transient_skip)
    dm = np.abs(np.diff(m_w))
    dr = np.abs(np.diff(r_w))
    if dr.size == 0:
        raise NumericError("NSAVI needs at least two retained samples")
    if not pointwise:
        total = float(np.sum(dr))
        if total == 0.0:
            raise NumericError("Reference has no variation; NSAVI is undefined")
        return float(np.sum(dm)) / total

    if epsilon is None:
        if np.any(dr == 0.0):
            raise NumericError(
                "Reference increment is zero; pass an epsilon guard for the pointwise NSAVI"
            )
        keep = np.ones(dr.shape, dtype=bool)
    else:
        keep = dr > epsilon
        if not keep.any():
            raise NumericError(f"No reference increment exceeds epsilon {epsilon}")
        _LOGGER.debug("Pointwise NSAVI skips %d increment(s)", int(np.count_nonzero(~keep)))
    return float(np.mean(dm[keep] / dr[keep]))


def summarize(
    reference: Signal,
    actual: Signal,
    m: Signal,
    transient_skip: int = 0,
    pointwise: bool = False,
    epsilon: float | None = None,
) -> MetricsSummary:
    return {
        "mape": mape(reference, actual, transient_skip),
        "nsavi": nsavi(m, reference, transient_skip, pointwise=pointwise, epsilon=epsilon),
        "n_samples": len(reference) - transient_skip,
        "transient_skip": transient_skip,
    }
