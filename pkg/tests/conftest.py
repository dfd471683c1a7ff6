"""Shared fixtures and independent oracles.

The oracles deliberately avoid the library's own code paths: the LP oracle
uses an interior-point method rather than the dual simplex used by
``exact_ot``, the quantile oracle scans the definition directly, and the
GW oracle evaluates the distortion by explicit quadruple loops.
"""

import itertools

import numpy as np
import pytest
from scipy.optimize import linprog

from gwbounds.spaces import MmSpace, PointCloud, StructuredSpace, mm_from_point_cloud


def lp_oracle(C, a, b):
    """Optimal transport cost by a generic LP (interior point)."""
    C = np.asarray(C, dtype=np.float64)
    n, m = C.shape
    A_eq = np.zeros((n + m, n * m))
    for i in range(n):
        A_eq[i, i * m:(i + 1) * m] = 1.0
    for j in range(m):
        A_eq[n + j, j::m] = 1.0
    res = linprog(C.ravel(), A_eq=A_eq, b_eq=np.concatenate([a, b]), bounds=(0, None),
                  method="highs-ipm", options={"primal_feasibility_tolerance": 1e-10,
                                               "dual_feasibility_tolerance": 1e-10})
    assert res.status == 0
    return float(res.fun)


def permutation_oracle(C):
    """min over permutations of mean C[i, perm[i]] (uniform equal-size OT)."""
    n = C.shape[0]
    return min(np.mean(C[np.arange(n), list(p)]) for p in itertools.permutations(range(n)))


def quantile_oracle(values, masses, s):
    """inf{z in values : sum of masses at values <= z  >  s}, by direct scan."""
    best = None
    for z in values:
        F = sum(m for v, m in zip(values, masses) if v <= z)
        if F > s and (best is None or z < best):
            best = z
    return best if best is not None else max(values)


def gw_distortion_loop(DX, DY, perm, p):
    """sum_{i,k} |DX_ik - DY_{perm i, perm k}|^p / n^2 by explicit loops."""
    n = len(perm)
    tot = 0.0
    for i in range(n):
        for k in range(n):
            tot += abs(DX[i, k] - DY[perm[i], perm[k]]) ** p
    return tot / n**2


def random_cloud_space(rng, n, dim=2, weights=None):
    return mm_from_point_cloud(PointCloud(rng.standard_normal((n, dim)), weights))


def random_structured(rng, n, dim=2, d=1, weights=None):
    return StructuredSpace(random_cloud_space(rng, n, dim, weights), rng.standard_normal((n, d)))


def random_weights(rng, n):
    w = rng.random(n) + 0.1
    return w / w.sum()


def random_dissimilarity(rng, n):
    """Symmetric nonnegative zero-diagonal matrix (not necessarily a metric)."""
    A = rng.random((n, n))
    D = A + A.T
    np.fill_diagonal(D, 0.0)
    return MmSpace(D)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# ---------------------------------------------------------------------------
# acceptance report: one line per criterion, shown in the terminal summary

ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """``acceptance(number, passed, detail)`` records and prints one verdict line."""

    def record(number, passed, detail):
        line = f"criterion {str(number):>3}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
