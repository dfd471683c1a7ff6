"""Monte Carlo sliced 2-Wasserstein distance and the dimensional constant.

Directions are normalised standard normal draws from numpy's PCG64 bit
generator seeded with the user seed, so ``(seed, L, D)`` identifies a
projection set on every platform numpy supports.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from ._util import project
from ._validation import as_float_array, check_positive_int, check_probability_vector, frozen
from .exceptions import DimensionMismatchError, DomainError
from .transport import sorted_w2_columns

GENERATOR = "numpy.random.PCG64"
RULES = ("monte-carlo",)


@dataclass(frozen=True, eq=False)
class ProjectionSet:
    """``L`` unit directions in ``R^dim`` derived from ``seed``."""

    directions: np.ndarray
    seed: int
    dim: int
    rule: str = "monte-carlo"
    generator: str = GENERATOR

    @property
    def L(self):
        return self.directions.shape[0]

    def metadata(self):
        return {"seed": self.seed, "L": self.L, "dim": self.dim,
                "rule": self.rule, "generator": self.generator}


def sample_directions(seed, L, D, rule="monte-carlo"):
    """Draw ``L`` i.i.d. uniform directions on the sphere ``S^{D-1}``."""
    if D == 0:
        raise DomainError("projection dimension must be positive")
    L = check_positive_int(L, "L")
    D = check_positive_int(D, "D")
    if rule not in RULES:
        raise DomainError(f"unsupported direction rule {rule!r}")
    rng = np.random.Generator(np.random.PCG64(seed))
    G = rng.standard_normal((L, D))
    norms = np.sqrt(np.sum(G * G, axis=1))
    while np.any(norms == 0):  # pragma: no cover - probability zero
        bad = norms == 0
        G[bad] = rng.standard_normal((int(bad.sum()), D))
        norms = np.sqrt(np.sum(G * G, axis=1))
    return ProjectionSet(frozen(G / norms[:, None]), int(seed), D, rule)


def _check_inputs(A, wa, B, wb, proj):
    A = as_float_array(A, "A")
    B = as_float_array(B, "B")
    if A.ndim == 1:
        A = A[:, None]
    if B.ndim == 1:
        B = B[:, None]
    if A.shape[1] != B.shape[1] or A.shape[1] != proj.dim:
        raise DimensionMismatchError(
            f"inputs in R^{A.shape[1]} and R^{B.shape[1]}, directions in R^{proj.dim}"
        )
    wa = check_probability_vector(wa, "wa", size=A.shape[0])
    wb = check_probability_vector(wb, "wb", size=B.shape[0])
    return A, wa, B, wb


def sw2_per_projection(A, wa, B, wb, proj):
    """``W_2^2`` of the two projected measures for every direction."""
    A, wa, B, wb = _check_inputs(A, wa, B, wb, proj)
    return sorted_w2_columns(project(A, proj.directions), wa,
                             project(B, proj.directions), wb)


def sw2_squared(A, wa, B, wb, proj, return_std=False):
    """Monte Carlo estimate of ``SW_2^2``: the mean of per-direction ``W_2^2``.

    With ``return_std`` also returns the standard error of that mean.
    """
    vals = sw2_per_projection(A, wa, B, wb, proj)
    est = float(np.mean(vals))
    if return_std:
        se = float(np.std(vals, ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else 0.0
        return est, se
    return est


def log_sphere_area(n):
    """``log A(S^n)`` with ``A(S^n) = 2 pi^{(n+1)/2} / Gamma((n+1)/2)``."""
    h = 0.5 * (n + 1)
    return np.log(2.0) + h * np.log(np.pi) - gammaln(h)


def dimension_constant(k, l, squared=False):
    """Factor by which slicing in ``R^{k+l}`` shrinks SW of measures living in ``R^l``.

    Zero-padding two measures on ``R^l`` with ``k`` extra coordinates
    multiplies their sliced 2-Wasserstein distance by this constant.
    """
    k = check_positive_int(k, "k")
    if l <= 1 or int(l) != l:
        raise DomainError(f"l must be an integer > 1, got {l}")
    l = int(l)
    log_c2 = (log_sphere_area(k + l + 1) - log_sphere_area(l + 1)
              + log_sphere_area(l - 1) - log_sphere_area(k + l - 1))
    return float(np.exp(log_c2 if squared else 0.5 * log_c2))
