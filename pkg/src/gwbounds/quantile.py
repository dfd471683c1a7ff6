"""Sampled quantile functions of local distance distributions.

Every point ``x_i`` of an mm-space carries the distribution of distances
``g(x_i, .)`` pushed forward by the space's measure, self-distance
included.  Sampling its quantile function at the knots of a positive
quadrature rule and scaling by ``sqrt(w_k)`` turns a point into a vector
in ``R^r``; squared Euclidean distances between such vectors approximate
(and for uniform weights with the midpoint rule ``r = n``, equal) the
squared 2-Wasserstein distance between the underlying distributions.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from ._validation import (
    as_float_array,
    check_alpha,
    check_positive_int,
    check_probability_vector,
    frozen,
    is_uniform,
)
from .exceptions import DimensionMismatchError, DomainError, ValidationError
from .spaces import as_mm

_BREAKPOINT_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Knots in ``(0, 1)`` (strictly increasing) with positive weights."""

    knots: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        s = as_float_array(self.knots, "knots", ndim=1)
        w = as_float_array(self.weights, "weights", ndim=1)
        if s.shape != w.shape or s.size == 0:
            raise ValidationError("knots and weights must be non-empty and equally long")
        if np.any(s <= 0) or np.any(s >= 1):
            raise ValidationError("knots must lie in the open interval (0, 1)")
        if np.any(np.diff(s) <= 0):
            raise ValidationError("knots must be strictly increasing")
        if np.any(w <= 0):
            raise ValidationError("quadrature weights must be positive")
        if abs(w.sum() - 1.0) > 1e-12:
            warnings.warn(
                f"quadrature weights sum to {w.sum():.6g}, not 1; using them as given",
                stacklevel=3,
            )
        object.__setattr__(self, "knots", frozen(s))
        object.__setattr__(self, "weights", frozen(w))

    @property
    def r(self):
        return self.knots.shape[0]

    @property
    def mass_deviation(self):
        """``sum(weights) - 1``; zero for the built-in rules."""
        return float(self.weights.sum() - 1.0)


def midpoint_rule(r):
    """Equispaced midpoint rule: knots ``(k - 1/2)/r``, weights ``1/r``."""
    if r == 0:
        raise DomainError("quadrature size r must be positive")
    r = check_positive_int(r, "r")
    knots = (np.arange(1, r + 1) - 0.5) / r
    return QuadratureRule(knots, np.full(r, 1.0 / r))


def _breakpoints(w):
    cum = np.cumsum(w)
    cum[-1] = 1.0
    return cum


def nonequispaced_midpoint_rule(wa, wb):
    """Midpoint rule on the merged cumulative-mass breakpoints of ``wa`` and ``wb``.

    Exact for the 2-Wasserstein distance between any two distributions whose
    atoms carry the masses ``wa`` and ``wb`` in sorted order, e.g. uniform
    empirical measures of different sizes.
    """
    wa = check_probability_vector(wa, "wa")
    wb = check_probability_vector(wb, "wb")
    t = np.concatenate([[0.0], _breakpoints(wa), _breakpoints(wb)])
    t = np.unique(t)
    keep = np.concatenate([[True], np.diff(t) > _BREAKPOINT_TOL])
    t = t[keep]
    t[-1] = 1.0
    return QuadratureRule(0.5 * (t[:-1] + t[1:]), np.diff(t))


def _uniform_cum(n):
    return np.arange(1, n + 1) / n


def weighted_quantile(values, masses, s):
    """Quantile ``inf{z : F(z) > s}`` of a discrete distribution.

    Returns the first value in ascending order whose cumulative mass is
    strictly larger than ``s``.
    """
    s = float(s)
    if not 0.0 < s < 1.0:
        raise DomainError(f"quantile level must lie in (0, 1), got {s}")
    values = as_float_array(values, "values", ndim=1)
    masses = check_probability_vector(masses, "masses", size=values.shape[0])
    order = np.argsort(values, kind="stable")
    cum = _uniform_cum(len(values)) if is_uniform(masses) else np.cumsum(masses[order])
    idx = min(int(np.searchsorted(cum, s, side="right")), len(values) - 1)
    return float(values[order[idx]])


def quantile_indices(cum, knots):
    """Positions in sorted order selected by each knot (vectorised quantile rule)."""
    idx = np.searchsorted(cum, knots, side="right")
    return np.minimum(idx, len(cum) - 1)


def row_quantiles(distances, weights, knots, return_argsort=False):
    """Quantiles of each row's distance distribution at ``knots``.

    Returns an ``n x r`` array of raw (unscaled) quantile values.  With
    ``return_argsort`` the column index in ``distances`` that realises each
    entry is returned as well (used for envelope gradients).
    """
    D = np.asarray(distances, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    knots = np.asarray(knots, dtype=np.float64)
    n = D.shape[0]
    if is_uniform(w):
        idx = quantile_indices(_uniform_cum(D.shape[1]), knots)
        if return_argsort:
            order = np.argsort(D, axis=1, kind="stable")
            cols = order[:, idx]
            return np.take_along_axis(D, cols, axis=1), cols
        kth = np.unique(idx)
        # multi-pivot partition is slower than numpy's vectorised sort
        # beyond a couple of order statistics
        part = np.partition(D, kth, axis=1) if len(kth) <= 2 else np.sort(D, axis=1)
        return part[:, idx]
    order = np.argsort(D, axis=1, kind="stable")
    cols = np.empty((n, knots.shape[0]), dtype=np.intp)
    for i in range(n):
        cum = np.cumsum(w[order[i]])
        cols[i] = order[i, quantile_indices(cum, knots)]
    values = np.take_along_axis(D, cols, axis=1)
    if return_argsort:
        return values, cols
    return values


@dataclass(frozen=True, eq=False)
class QuantileEmbedding:
    """Rows ``(sqrt(w_k) * q_i(s_k))_k`` for every point ``i`` of a space."""

    vectors: np.ndarray
    rule: QuadratureRule
    weights: np.ndarray

    @property
    def n(self):
        return self.vectors.shape[0]

    @property
    def r(self):
        return self.vectors.shape[1]

    def quantiles(self):
        """Raw quantile samples (the scaling by ``sqrt(w_k)`` undone)."""
        return self.vectors / np.sqrt(self.rule.weights)

    def to_csv(self, path):
        np.savetxt(path, self.vectors, delimiter=",", fmt="%.17g")


@dataclass(frozen=True, eq=False)
class FusedEmbedding:
    """Rows ``(sqrt(1 - alpha) * q_i ; sqrt(alpha) * z_i)``."""

    vectors: np.ndarray
    alpha: float
    weights: np.ndarray
    r: int

    @property
    def n(self):
        return self.vectors.shape[0]

    @property
    def d(self):
        return self.vectors.shape[1] - self.r

    def to_csv(self, path):
        np.savetxt(path, self.vectors, delimiter=",", fmt="%.17g")


def embed(space, rule):
    """Quantile embedding of every point of ``space`` under ``rule``."""
    mm = as_mm(space)
    if isinstance(rule, (int, np.integer)):
        rule = midpoint_rule(rule)
    q = row_quantiles(mm.distances, mm.weights, rule.knots)
    vectors = q * np.sqrt(rule.weights)
    return QuantileEmbedding(frozen(vectors), rule, mm.weights)


def fuse(qe, features, alpha):
    """Stack ``sqrt(1 - alpha)``-scaled quantiles with ``sqrt(alpha)``-scaled features."""
    alpha = check_alpha(alpha)
    F = np.asarray(features, dtype=np.float64)
    if F.ndim == 1:
        F = F[:, None]
    if F.ndim != 2 or F.shape[0] != qe.n:
        raise DimensionMismatchError(
            f"features with shape {F.shape} do not match {qe.n} embedded points"
        )
    vectors = np.hstack([np.sqrt(1.0 - alpha) * qe.vectors, np.sqrt(alpha) * F])
    return FusedEmbedding(frozen(vectors), alpha, qe.weights, qe.r)


def fused_embedding(space, rule, alpha):
    """``fuse(embed(space, rule), space.features, alpha)`` for a structured space."""
    features = getattr(space, "features", None)
    if features is None:
        features = np.zeros((as_mm(space).n, 0))
    return fuse(embed(space, rule), features, alpha)
