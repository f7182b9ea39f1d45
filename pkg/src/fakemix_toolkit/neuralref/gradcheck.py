"""
Finite difference verification of analytic gradients.
"""

import logging
from typing import Callable

import numpy as np

from fakemix_toolkit.common.error_handling import BadInputError, ShapeMismatchError

LOGGER = logging.getLogger(__name__)


def central_difference(
    fn: Callable[[np.ndarray], float], point: np.ndarray, h: float = 1e-5
) -> np.ndarray:
    """Centered-difference gradient of a scalar function of a vector."""
    if h <= 0:
        raise BadInputError(detail=f"Step size must be > 0, got {h}")
    x0 = np.array(point, dtype=np.float64)
    grad = np.zeros_like(x0)
    x = x0.copy()
    for j in range(x0.size):
        x.flat[j] = x0.flat[j] + h
        f_plus = fn(x)
        x.flat[j] = x0.flat[j] - h
        f_minus = fn(x)
        x.flat[j] = x0.flat[j]
        grad.flat[j] = (f_plus - f_minus) / (2.0 * h)
    return grad


def finite_diff_check(
    fn: Callable[[np.ndarray], float],
    point: np.ndarray,
    grad: Callable[[np.ndarray], np.ndarray],
    h: float = 1e-5,
) -> float:
    """
    Largest deviation between the analytic gradient and central differences,
    relative to the largest gradient component.
    """
    numeric = central_difference(fn, point, h)
    analytic = np.asarray(grad(np.array(point, dtype=np.float64)), dtype=np.float64)
    if analytic.shape != numeric.shape:
        raise ShapeMismatchError(
            detail=f"Analytic gradient {analytic.shape} vs numeric {numeric.shape}"
        )
    scale = max(np.abs(analytic).max(initial=0), np.abs(numeric).max(initial=0), 1e-12)
    error = float(np.abs(analytic - numeric).max(initial=0) / scale)
    LOGGER.debug("Gradient check over %d components: %.3e", numeric.size, error)
    return error
