"""Helper functions for PyNarxHysteresis"""

from typing import Tuple

import numpy as np
import numpy.typing as npt
from scipy.signal import savgol_filter

FloatArray = npt.NDArray[np.float64]


def sign(value: float) -> float:
    """Three-valued sign, sign(0) = 0."""
    return float((value > 0) - (value < 0))


def phi_arrays(u: FloatArray) -> Tuple[FloatArray, FloatArray]:
    """Increment and increment sign of a sampled input, zero at index 0."""
    phi1 = np.zeros_like(u, dtype=float)
    phi1[1:] = np.diff(u)
    return phi1, np.sign(phi1)


def smooth_quadratic(values: FloatArray, window: int) -> FloatArray:
    """Moving quadratic regression over an odd window.

    Each sample is replaced by the value at its position of the least squares
    parabola fitted over the surrounding window; edges use the fit over the
    first and last full window.

    Args:
        values: Sampled sequence
        window: Odd number of samples, at least 3

    Returns:
        Smoothed copy of the sequence
    """
    if window < 3 or window % 2 == 0:
        raise ValueError(f"Smoothing window must be odd and >= 3, got {window}")
    if window > len(values):
        raise ValueError(
            f"Smoothing window {window} longer than the signal ({len(values)} samples)"
        )
    return np.asarray(savgol_filter(values, window, 2, mode="interp"), dtype=float)


def shoelace_area(x: FloatArray, y: FloatArray) -> float:
    """Signed area enclosed by a closed polyline, counter-clockwise positive."""
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
