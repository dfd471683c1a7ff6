"""Small input-checking helpers used across the package."""

import numpy as np

from .exceptions import (
    DomainError,
    NegativeEntryError,
    NonFiniteError,
    ShapeError,
    WeightSumError,
)

# sums inside this band are silently renormalized
WEIGHT_RENORM_TOL = 1e-6
WEIGHT_SUM_TOL = 1e-12


def as_float_array(x, name, ndim=None):
    arr = np.asarray(x, dtype=np.float64)
    if ndim is not None and arr.ndim != ndim:
        raise ShapeError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{name} contains non-finite entries")
    return arr


def frozen(arr):
    arr = np.array(arr, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


def check_probability_vector(w, name="weights", size=None, renormalize=True):
    """Return ``w`` as a float vector on the probability simplex.

    Sums within ``1 +- 1e-6`` are rescaled to one when ``renormalize`` is
    set; anything further away raises :class:`WeightSumError`.
    """
    w = as_float_array(w, name, ndim=1)
    if size is not None and w.shape[0] != size:
        raise ShapeError(f"{name} has length {w.shape[0]}, expected {size}")
    if w.shape[0] == 0:
        raise ShapeError(f"{name} must be non-empty")
    if np.any(w < 0):
        raise NegativeEntryError(f"{name} has negative entries")
    total = float(w.sum())
    if renormalize and abs(total - 1.0) <= WEIGHT_RENORM_TOL:
        # only rescale what the simplex tolerance would reject, so exact
        # inputs (e.g. n copies of 1/n) pass through bit-for-bit
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            w = w / total
        return w
    if abs(total - 1.0) > WEIGHT_SUM_TOL:
        raise WeightSumError(f"{name} sum to {total!r}, expected 1")
    return w


def is_uniform(w):
    return bool(np.all(w == w[0]))


def check_order(p):
    p = float(p)
    if not np.isfinite(p) or p < 1:
        raise DomainError(f"order p must be >= 1, got {p}")
    return p


def check_alpha(alpha):
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    return alpha


def check_positive_int(value, name, minimum=1):
    if int(value) != value or value < minimum:
        raise DomainError(f"{name} must be an integer >= {minimum}, got {value}")
    return int(value)
