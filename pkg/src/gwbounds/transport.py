"""Wasserstein solvers: closed-form 1D, exact discrete OT and log-domain Sinkhorn.

Exact OT uses a rectangular assignment solver for uniform equal-size
marginals (a permutation is then optimal) and the HiGHS dual simplex on
the transportation LP otherwise.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import linear_sum_assignment, linprog

from ._util import pairwise_sq_dists
from ._validation import (
    as_float_array,
    check_order,
    check_probability_vector,
    is_uniform,
)
from .exceptions import (
    ConvergenceWarning,
    DimensionMismatchError,
    DomainError,
    GWBoundsError,
    NegativeEntryError,
    ShapeError,
)

DEFAULT_EPSILON = 1e-3
DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 10_000


@dataclass(frozen=True, eq=False)
class TransportPlan:
    """Coupling matrix with the (unregularised) objective value it attains."""

    matrix: np.ndarray
    cost: float
    solver: str = "exact"
    converged: bool = True
    iterations: int = 0
    marginal_error: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_csv(self, path):
        np.savetxt(path, self.matrix, delimiter=",", fmt="%.17g")


def check_cost_matrix(cost, n=None, m=None):
    C = as_float_array(cost, "cost", ndim=2)
    if np.any(C < 0):
        raise NegativeEntryError("cost matrix has negative entries")
    if (n is not None and C.shape[0] != n) or (m is not None and C.shape[1] != m):
        raise ShapeError(f"cost matrix has shape {C.shape}, expected ({n}, {m})")
    return C


# ---------------------------------------------------------------------------
# one dimension


def _cum(w):
    if is_uniform(w):
        return np.arange(1, len(w) + 1) / len(w)
    cum = np.cumsum(w)
    cum[-1] = 1.0
    return cum


def monotone_coupling(wa, wb):
    """Quantile coupling of two sorted discrete measures.

    Returns index arrays ``ia, ib`` and interval lengths ``mass`` such that
    the monotone plan puts ``mass[t]`` on ``(ia[t], ib[t])``.  At most
    ``n + m - 1`` pieces.
    """
    ca = _cum(np.asarray(wa, dtype=np.float64))
    cb = _cum(np.asarray(wb, dtype=np.float64))
    t = np.unique(np.concatenate([[0.0], ca, cb]))
    mass = np.diff(t)
    keep = mass > 0
    mid = 0.5 * (t[:-1] + t[1:])[keep]
    mass = mass[keep]
    ia = np.minimum(np.searchsorted(ca, mid, side="right"), len(ca) - 1)
    ib = np.minimum(np.searchsorted(cb, mid, side="right"), len(cb) - 1)
    return ia, ib, mass


def wasserstein_1d(va, wa, vb, wb, p=2.0):
    """``W_p^p`` between two discrete measures on the real line.

    Sorts both supports and integrates ``|q_a(s) - q_b(s)|^p`` exactly over
    the merged cumulative-mass intervals.
    """
    p = check_order(p)
    va = as_float_array(va, "va", ndim=1)
    vb = as_float_array(vb, "vb", ndim=1)
    wa = check_probability_vector(wa, "wa", size=va.shape[0])
    wb = check_probability_vector(wb, "wb", size=vb.shape[0])
    oa = np.argsort(va, kind="stable")
    ob = np.argsort(vb, kind="stable")
    ia, ib, mass = monotone_coupling(wa[oa], wb[ob])
    diff = np.abs(va[oa][ia] - vb[ob][ib])
    return float(np.sum(mass * diff**p))


def sorted_w2_columns(Pa, wa, Pb, wb):
    """Column-wise ``W_2^2`` between projected supports ``Pa`` (n x L) and ``Pb`` (m x L)."""
    L = Pa.shape[1]
    if is_uniform(wa) and is_uniform(wb):
        ia, ib, mass = monotone_coupling(wa, wb)
        Sa = np.sort(Pa, axis=0)
        Sb = np.sort(Pb, axis=0)
        diff = Sa[ia] - Sb[ib]
        return mass @ (diff * diff)
    n, m = Pa.shape[0], Pb.shape[0]
    oa = np.argsort(Pa, axis=0, kind="stable")
    ob = np.argsort(Pb, axis=0, kind="stable")
    Ca = np.cumsum(wa[oa], axis=0)
    Cb = np.cumsum(wb[ob], axis=0)
    Ca[-1] = Cb[-1] = 1.0
    # merge the breakpoints of every column at once; on each merged interval
    # the quantile index of a side is the number of its breakpoints before it
    merged = np.concatenate([Ca, Cb], axis=0)
    order = np.argsort(merged, axis=0, kind="stable")
    T = np.take_along_axis(merged, order, axis=0)
    mass = np.diff(T, axis=0, prepend=0.0)
    from_a = order < n
    ia = np.minimum(np.cumsum(from_a, axis=0) - from_a, n - 1)
    ib = np.minimum(np.cumsum(~from_a, axis=0) - ~from_a, m - 1)
    Sa = np.take_along_axis(Pa, oa, axis=0)
    Sb = np.take_along_axis(Pb, ob, axis=0)
    diff = np.take_along_axis(Sa, ia, axis=0) - np.take_along_axis(Sb, ib, axis=0)
    return np.einsum("kl,kl->l", mass, diff * diff)


# ---------------------------------------------------------------------------
# exact discrete OT


def _support(w):
    return np.flatnonzero(w > 0)


def _embed_plan(sub, rows, cols, n, m):
    plan = np.zeros((n, m))
    plan[np.ix_(rows, cols)] = sub
    return plan


def _solve_lp(C, a, b):
    n, m = C.shape
    rows = sparse.kron(sparse.eye(n), np.ones((1, m)))
    cols = sparse.kron(np.ones((1, n)), sparse.eye(m))
    A_eq = sparse.vstack([rows, cols]).tocsr()
    b_eq = np.concatenate([a, b])
    res = linprog(
        C.ravel(),
        A_eq=A_eq,
        b_eq=b_eq,
        bounds=(0, None),
        method="highs-ds",
        options={
            "primal_feasibility_tolerance": 1e-10,
            "dual_feasibility_tolerance": 1e-10,
        },
    )
    if res.status != 0:
        raise GWBoundsError(f"transportation LP failed: {res.message}")
    return np.maximum(res.x.reshape(n, m), 0.0)


def exact_ot(cost, wa, wb):
    """Optimal plan of ``min <gamma, cost>`` over couplings of ``wa`` and ``wb``."""
    wa = check_probability_vector(wa, "wa")
    wb = check_probability_vector(wb, "wb")
    C = check_cost_matrix(cost, len(wa), len(wb))
    n, m = C.shape
    ra, rb = _support(wa), _support(wb)
    a, b = wa[ra], wb[rb]
    Cs = C[np.ix_(ra, rb)]
    if len(a) == len(b) and is_uniform(a) and is_uniform(b):
        ri, ci = linear_sum_assignment(Cs)
        sub = np.zeros_like(Cs)
        sub[ri, ci] = a[0]
        solver = "assignment"
        value = float(a[0] * Cs[ri, ci].sum())
    else:
        sub = _solve_lp(Cs, a, b)
        solver = "highs-ds"
        value = float(np.sum(sub * Cs))
    plan = _embed_plan(sub, ra, rb, n, m)
    err = float(np.abs(plan.sum(1) - wa).sum() + np.abs(plan.sum(0) - wb).sum())
    return TransportPlan(plan, value, solver=solver, marginal_error=err)


# ---------------------------------------------------------------------------
# entropic OT


def round_to_marginals(T, a, b):
    """Project a near-feasible plan onto the coupling polytope.

    Scales rows and columns down to their targets and spreads the missing
    mass as a rank-one correction, giving exact marginals.
    """
    T = np.asarray(T, dtype=np.float64).copy()
    rs = T.sum(1)
    x = np.where(rs > a, a / np.where(rs > 0, rs, 1.0), 1.0)
    T *= x[:, None]
    cs = T.sum(0)
    y = np.where(cs > b, b / np.where(cs > 0, cs, 1.0), 1.0)
    T *= y[None, :]
    # after the scaling both residues are nonnegative up to rounding
    ea = np.maximum(a - T.sum(1), 0.0)
    eb = np.maximum(b - T.sum(0), 0.0)
    total = ea.sum()
    if total > 0:
        T += np.outer(ea, eb) / total
    return T


SCALING_FACTOR = 0.5
SCALING_ITERS = 200
SCALING_TOL = 1e-4
DEFAULT_RELAXATION = 1.5


def _lse(Z, axis):
    # scipy.special.logsumexp without the input checks; this sits in the hot loop
    m = Z.max(axis=axis, keepdims=True)
    m[~np.isfinite(m)] = 0.0
    return (np.log(np.exp(Z - m).sum(axis=axis, keepdims=True)) + m).squeeze(axis)


def _sinkhorn_loop(C, log_a, log_b, a, b, f, g, epsilon, max_iter, tol, omega):
    """Over-relaxed log-domain updates; returns ``(f, g, iterations, error)``.

    ``omega = 1`` is plain Sinkhorn; ``1 < omega < 2`` extrapolates each
    potential update, which shares the fixed point and typically needs far
    fewer sweeps at small ``epsilon``.
    """
    K = -C / epsilon
    err = np.inf
    it = 0
    good = (f, g)
    while it < max_iter:
        it += 1
        f = f + omega * (epsilon * (log_a - _lse(K + g[None, :] / epsilon, 1)) - f)
        g = g + omega * (epsilon * (log_b - _lse(K + f[:, None] / epsilon, 0)) - g)
        if it % 10 == 0 or it == max_iter or it == 1:
            with np.errstate(over="ignore", invalid="ignore"):
                P = np.exp(K + (f[:, None] + g[None, :]) / epsilon)
                err = float(np.abs(P.sum(1) - a).sum() + np.abs(P.sum(0) - b).sum())
            if not np.isfinite(err):
                # over-relaxation overshot; fall back to plain updates
                f, g = good
                omega = 1.0
                continue
            good = (f, g)
            if err < tol:
                break
    return f, g, it, err


def sinkhorn(
    cost,
    wa,
    wb,
    epsilon=DEFAULT_EPSILON,
    max_iter=DEFAULT_MAX_ITER,
    tol=DEFAULT_TOL,
    init=None,
    relaxation=DEFAULT_RELAXATION,
):
    """Entropic OT by log-domain Sinkhorn iterations.

    ``epsilon`` is in absolute cost units.  Iteration stops once the L1
    marginal error drops below ``tol``; otherwise a
    :class:`ConvergenceWarning` is emitted and the plan is flagged as not
    converged.  The reported ``cost`` is the unregularised ``<gamma, cost>``.
    ``init`` optionally supplies starting dual potentials ``(f, g)``; without
    it the solve is warm-started by epsilon scaling from the largest cost.
    ``relaxation`` is the over-relaxation factor in ``[1, 2)``.  The returned
    plan is rounded onto the exact marginals, so it is always feasible.
    """
    if not 1 <= relaxation < 2:
        raise DomainError(f"relaxation must lie in [1, 2), got {relaxation}")
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    wa = check_probability_vector(wa, "wa")
    wb = check_probability_vector(wb, "wb")
    C = check_cost_matrix(cost, len(wa), len(wb))
    n, m = C.shape
    ra, rb = _support(wa), _support(wb)
    a, b = wa[ra], wb[rb]
    Cs = C[np.ix_(ra, rb)]
    log_a, log_b = np.log(a), np.log(b)
    if init is None:
        f = np.zeros(len(a))
        g = np.zeros(len(b))
    else:
        f = np.asarray(init[0], dtype=np.float64)[ra]
        g = np.asarray(init[1], dtype=np.float64)[rb]
    it = 0
    if init is None:
        # epsilon scaling: coarse solves warm-start the dual potentials, which
        # cuts the iteration count at small epsilon by orders of magnitude
        eps = max(float(Cs.max()), epsilon)
        while eps > epsilon and it < max_iter:
            f, g, used, _ = _sinkhorn_loop(Cs, log_a, log_b, a, b, f, g, eps,
                                           min(SCALING_ITERS, max_iter - it), SCALING_TOL,
                                           relaxation)
            it += used
            eps = max(eps * SCALING_FACTOR, epsilon)
    f, g, used, _ = _sinkhorn_loop(Cs, log_a, log_b, a, b, f, g, epsilon, max_iter - it, tol,
                                  relaxation)
    it += used
    K = -Cs / epsilon
    sub = np.exp(K + (f[:, None] + g[None, :]) / epsilon)
    err = float(np.abs(sub.sum(1) - a).sum() + np.abs(sub.sum(0) - b).sum())
    converged = err < tol
    if not converged:
        warnings.warn(
            f"Sinkhorn stopped after {it} iterations with marginal error {err:.3g}",
            ConvergenceWarning,
            stacklevel=2,
        )
    # the scaled kernel meets the marginals only up to ``err``; rounding makes
    # the plan feasible so its cost never undercuts the exact optimum
    sub = round_to_marginals(sub, a, b)
    plan = _embed_plan(sub, ra, rb, n, m)
    fa = np.zeros(n)
    gb = np.zeros(m)
    fa[ra], gb[rb] = f, g
    return TransportPlan(
        plan,
        float(np.sum(sub * Cs)),
        solver="sinkhorn",
        converged=converged,
        iterations=it,
        marginal_error=err,
        extra={"epsilon": float(epsilon), "potentials": (fa, gb)},
    )


def solve(cost, wa, wb, solver="exact", epsilon=DEFAULT_EPSILON,
          max_iter=DEFAULT_MAX_ITER, tol=DEFAULT_TOL):
    if solver == "exact":
        return exact_ot(cost, wa, wb)
    if solver == "sinkhorn":
        return sinkhorn(cost, wa, wb, epsilon=epsilon, max_iter=max_iter, tol=tol)
    raise ValueError(f"unknown solver {solver!r}")


def ot_cost_squared_euclidean(A, wa, B, wb, solver="exact", return_plan=False, **kwargs):
    """``W_2^2`` between weighted point sets ``A`` (n x k) and ``B`` (m x k)."""
    A = as_float_array(A, "A")
    B = as_float_array(B, "B")
    if A.ndim == 1:
        A = A[:, None]
    if B.ndim == 1:
        B = B[:, None]
    if A.shape[1] != B.shape[1]:
        raise DimensionMismatchError(
            f"point sets live in R^{A.shape[1]} and R^{B.shape[1]}"
        )
    plan = solve(pairwise_sq_dists(A, B), wa, wb, solver=solver, **kwargs)
    return plan if return_plan else plan.cost
