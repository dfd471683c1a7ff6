"""Lower bounds of the (fused) Gromov-Wasserstein distance and reference solvers.

Hierarchy implemented here, cheapest first:

* ``flb``  - 1D OT between eccentricity distributions,
* ``slb``  - 1D OT between the global distance distributions,
* ``tlb``  - outer OT whose cost is the 1D OT between local distance
  distributions (``local_distance_matrix``),
* ``ftlb`` - ``tlb`` with an ``alpha``-weighted feature term,
* ``stlb`` / ``sftlb`` - sliced Wasserstein between quantile embeddings,
  replacing the outer OT problem by random projections (``p = 2`` only).

``gw_bruteforce`` and ``fgw_entropic`` produce feasible plans of the
(fused) GW objective and hence upper bounds used as oracles.
"""

import itertools
import time
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache

import numpy as np

from . import transport
from ._util import pairwise_sq_dists
from ._validation import check_alpha, check_order, is_uniform
from .exceptions import (
    DimensionMismatchError,
    DomainError,
    UnsupportedOrderError,
    ValidationError,
)
from .quantile import QuadratureRule, fused_embedding, midpoint_rule, row_quantiles
from .sliced import sample_directions, sw2_per_projection
from .spaces import as_mm, as_structured

BRUTEFORCE_MAX_N = 8


@dataclass(frozen=True)
class BoundConfig:
    """Parameters shared by all bounds.

    ``rule`` takes precedence over ``r``; with neither, the midpoint rule
    with ``r = max(n, m)`` is used, which is exact for uniform equal-size
    inputs.  Sliced bounds require a fixed ``r`` (or ``rule``) to compare
    many spaces under one set of directions.
    """

    p: float = 2.0
    alpha: float = 0.0
    r: int = None
    rule: QuadratureRule = None
    num_projections: int = 100
    seed: int = 0
    solver: str = "exact"
    epsilon: float = transport.DEFAULT_EPSILON
    max_iter: int = transport.DEFAULT_MAX_ITER
    tol: float = transport.DEFAULT_TOL

    def __post_init__(self):
        check_order(self.p)
        check_alpha(self.alpha)
        if self.solver not in ("exact", "sinkhorn"):
            raise DomainError(f"unknown outer solver {self.solver!r}")
        if self.r is not None and self.r < 1:
            raise DomainError("r must be positive")
        if self.num_projections < 1:
            raise DomainError("num_projections must be positive")

    def quadrature(self, n, m):
        if self.rule is not None:
            return self.rule
        return midpoint_rule(self.r if self.r is not None else max(n, m))

    def as_dict(self):
        out = asdict(self)
        if self.rule is not None:
            out["rule"] = {"knots": self.rule.knots.tolist(),
                           "weights": self.rule.weights.tolist()}
        return out


@dataclass(frozen=True, eq=False)
class DistanceResult:
    value: float
    value_power_p: float
    p: float = 2.0
    plan: transport.TransportPlan = None
    metadata: dict = field(default_factory=dict)

    def __float__(self):
        return self.value


def _result(power, p, name, t0, plan=None, **meta):
    power = float(power)
    value = max(power, 0.0) ** (1.0 / p)
    meta = {"bound": name, "wall_time": time.perf_counter() - t0, **meta}
    if plan is not None:
        meta.setdefault("solver", plan.solver)
        meta.setdefault("iterations", plan.iterations)
        meta.setdefault("converged", plan.converged)
    return DistanceResult(value, power, p, plan, meta)


def _cfg(cfg, **overrides):
    cfg = BoundConfig() if cfg is None else cfg
    return replace(cfg, **overrides) if overrides else cfg


# ---------------------------------------------------------------------------
# first and second lower bounds


def eccentricities(space, p=2.0):
    """Pointwise ``p``-eccentricity ``(sum_j w_j g(x_i, x_j)^p)^{1/p}``."""
    mm = as_mm(space)
    # summing each row's sorted terms makes the result independent of point order
    terms = np.sort(mm.distances**p * mm.weights[None, :], axis=1)
    return terms.sum(axis=1) ** (1.0 / p)


def flb(X, Y, p=2.0):
    """First lower bound: ``W_p`` between the eccentricity distributions."""
    t0 = time.perf_counter()
    p = check_order(p)
    X, Y = as_mm(X), as_mm(Y)
    power = transport.wasserstein_1d(eccentricities(X, p), X.weights,
                                     eccentricities(Y, p), Y.weights, p)
    return _result(power, p, "flb", t0)


def slb(X, Y, p=2.0):
    """Second lower bound: ``W_p`` between the laws of ``g(x, x')`` under ``xi x xi``."""
    t0 = time.perf_counter()
    p = check_order(p)
    X, Y = as_mm(X), as_mm(Y)
    power = transport.wasserstein_1d(
        X.distances.ravel(), np.outer(X.weights, X.weights).ravel(),
        Y.distances.ravel(), np.outer(Y.weights, Y.weights).ravel(), p,
    )
    return _result(power, p, "slb", t0)


# ---------------------------------------------------------------------------
# third lower bound and its fused extension


def _uniform_grid(n, m):
    t = np.unique(np.concatenate([[0.0], np.arange(1, n + 1) / n, np.arange(1, m + 1) / m]))
    mass = np.diff(t)
    keep = mass > 0
    return 0.5 * (t[:-1] + t[1:])[keep], mass[keep]


def local_distance_matrix(X, Y, p=2.0):
    """``LD_p^p(x_i, y_j)``: 1D ``W_p^p`` between distance rows ``i`` of X and ``j`` of Y."""
    p = check_order(p)
    X, Y = as_mm(X), as_mm(Y)
    n, m = X.n, Y.n
    if is_uniform(X.weights) and is_uniform(Y.weights):
        # both quantile functions are constant on the merged uniform grid
        mids, mass = _uniform_grid(n, m)
        QX = row_quantiles(X.distances, X.weights, mids)
        QY = row_quantiles(Y.distances, Y.weights, mids)
        out = np.zeros((n, m))
        for g in range(len(mass)):
            diff = np.abs(QX[:, g, None] - QY[None, :, g])
            out += mass[g] * (diff * diff if p == 2 else diff**p)
        return out
    out = np.empty((n, m))
    for i in range(n):
        for j in range(m):
            out[i, j] = transport.wasserstein_1d(
                X.distances[i], X.weights, Y.distances[j], Y.weights, p
            )
    return out


def feature_cost(X, Y, p=2.0):
    """``||z_i - z'_j||^p`` for structured spaces (zeros when ``d = 0``)."""
    X, Y = as_structured(X), as_structured(Y)
    if X.d != Y.d:
        raise DimensionMismatchError(f"feature dimensions differ: {X.d} vs {Y.d}")
    sq = pairwise_sq_dists(X.features, Y.features)
    return sq if p == 2 else sq ** (p / 2.0)


def _outer(cost, wa, wb, cfg):
    return transport.solve(cost, wa, wb, solver=cfg.solver, epsilon=cfg.epsilon,
                           max_iter=cfg.max_iter, tol=cfg.tol)


def tlb(X, Y, cfg=None):
    """Third lower bound: outer OT over the local distance costs."""
    t0 = time.perf_counter()
    cfg = _cfg(cfg)
    X, Y = as_mm(X), as_mm(Y)
    plan = _outer(local_distance_matrix(X, Y, cfg.p), X.weights, Y.weights, cfg)
    return _result(plan.cost, cfg.p, "tlb", t0, plan)


def ftlb_cost_matrix(X, Y, p=2.0, alpha=0.0):
    X, Y = as_structured(X), as_structured(Y)
    if X.d != Y.d:
        raise DimensionMismatchError(f"feature dimensions differ: {X.d} vs {Y.d}")
    cost = np.zeros((X.n, Y.n))
    if alpha < 1:
        cost += (1.0 - alpha) * local_distance_matrix(X, Y, p)
    if alpha > 0:
        cost += alpha * feature_cost(X, Y, p)
    return cost


def ftlb(X, Y, cfg=None, method="direct"):
    """Fused third lower bound.

    ``method="direct"`` solves OT on ``(1 - alpha) LD_p^p + alpha ||z - z'||^p``.
    ``method="embedding"`` (``p = 2``) solves OT between fused quantile
    embeddings under ``cfg``'s quadrature rule; with uniform equal-size
    inputs and the midpoint rule ``r = n`` both routes give the same value.
    """
    t0 = time.perf_counter()
    cfg = _cfg(cfg)
    X, Y = as_structured(X), as_structured(Y)
    if X.d != Y.d:
        raise DimensionMismatchError(f"feature dimensions differ: {X.d} vs {Y.d}")
    if method == "direct":
        cost = ftlb_cost_matrix(X, Y, cfg.p, cfg.alpha)
        meta = {}
    elif method == "embedding":
        if cfg.p != 2:
            raise UnsupportedOrderError("the embedding route requires p = 2")
        rule = cfg.quadrature(X.n, Y.n)
        EX = fused_embedding(X, rule, cfg.alpha)
        EY = fused_embedding(Y, rule, cfg.alpha)
        cost = pairwise_sq_dists(EX.vectors, EY.vectors)
        meta = {"r": rule.r}
    else:
        raise ValueError(f"unknown method {method!r}")
    plan = _outer(cost, X.weights, Y.weights, cfg)
    return _result(plan.cost, cfg.p, "ftlb", t0, plan, method=method,
                   alpha=cfg.alpha, **meta)


# ---------------------------------------------------------------------------
# sliced bounds


@lru_cache(maxsize=64)
def _directions(seed, L, D):
    return sample_directions(seed, L, D)


def _sliced(EX, wa, EY, wb, cfg, name, t0, **meta):
    proj = _directions(cfg.seed, cfg.num_projections, EX.shape[1])
    vals = sw2_per_projection(EX, wa, EY, wb, proj)
    est = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else 0.0
    return _result(est, 2.0, name, t0, standard_error=se, **proj.metadata(), **meta)


def _require_p2(cfg, name):
    if cfg.p != 2:
        raise UnsupportedOrderError(f"{name} is only defined for p = 2, got p = {cfg.p}")


def stlb(X, Y, cfg=None):
    """Sliced third lower bound: ``SW_2`` between structure-only quantile embeddings."""
    t0 = time.perf_counter()
    cfg = _cfg(cfg)
    _require_p2(cfg, "stlb")
    X, Y = as_mm(X), as_mm(Y)
    rule = cfg.quadrature(X.n, Y.n)
    EX = fused_embedding(X, rule, 0.0).vectors
    EY = fused_embedding(Y, rule, 0.0).vectors
    return _sliced(EX, X.weights, EY, Y.weights, cfg, "stlb", t0, r=rule.r)


def sftlb(X, Y, cfg=None):
    """Sliced fused third lower bound in dimension ``r + d``."""
    t0 = time.perf_counter()
    cfg = _cfg(cfg)
    _require_p2(cfg, "sftlb")
    X, Y = as_structured(X), as_structured(Y)
    if X.d != Y.d:
        raise DimensionMismatchError(f"feature dimensions differ: {X.d} vs {Y.d}")
    rule = cfg.quadrature(X.n, Y.n)
    EX = fused_embedding(X, rule, cfg.alpha).vectors
    EY = fused_embedding(Y, rule, cfg.alpha).vectors
    return _sliced(EX, X.weights, EY, Y.weights, cfg, "sftlb", t0,
                   r=rule.r, alpha=cfg.alpha)


# ---------------------------------------------------------------------------
# reference solvers


def distortion_tensor(DX, DY, T, p=2.0):
    """``(L (x) T)_{ij} = sum_{kl} |DX_ik - DY_jl|^p T_kl``."""
    if p == 2:
        out = ((DX * DX) @ T.sum(1))[:, None] + ((DY * DY) @ T.sum(0))[None, :]
        out -= 2.0 * DX @ T @ DY.T
        return np.maximum(out, 0.0)
    n, m = DX.shape[0], DY.shape[0]
    out = np.empty((n, m))
    for i in range(n):
        # axes (k, j, l)
        diff = np.abs(DX[i][:, None, None] - DY[None, :, :]) ** p
        out[i] = np.einsum("kjl,kl->j", diff, T)
    return out


def fgw_objective(X, Y, plan, alpha=0.0, p=2.0):
    """``(1 - alpha) D_p(plan) + alpha <plan, ||z - z'||^p>``."""
    X, Y = as_structured(X), as_structured(Y)
    T = np.asarray(plan, dtype=np.float64)
    value = 0.0
    if alpha < 1:
        value += (1.0 - alpha) * float(np.sum(distortion_tensor(X.distances, Y.distances, T, p) * T))
    if alpha > 0:
        value += alpha * float(np.sum(feature_cost(X, Y, p) * T))
    return value


def gw_bruteforce(X, Y, p=2.0, alpha=0.0):
    """Best permutation plan of the (fused) GW objective by enumeration.

    Restricted to uniform equal-size spaces with ``n <= 8``.  The value
    upper-bounds the true infimum over all couplings.
    """
    t0 = time.perf_counter()
    p = check_order(p)
    alpha = check_alpha(alpha)
    X, Y = as_structured(X), as_structured(Y)
    n = X.n
    if Y.n != n:
        raise ValidationError("brute-force GW needs equally sized spaces")
    if n > BRUTEFORCE_MAX_N:
        raise ValidationError(f"brute-force GW refused for n = {n} > {BRUTEFORCE_MAX_N}")
    if not (is_uniform(X.weights) and is_uniform(Y.weights)):
        raise ValidationError("brute-force GW needs uniform weights")
    DX, DY = X.distances, Y.distances
    perms = np.array(list(itertools.permutations(range(n))))
    fc = feature_cost(X, Y, p) if alpha > 0 else None
    best = np.inf
    best_perm = None
    for chunk in np.array_split(perms, max(1, len(perms) // 5000)):
        DYp = DY[chunk[:, :, None], chunk[:, None, :]]
        vals = np.zeros(len(chunk))
        if alpha < 1:
            vals += (1.0 - alpha) * np.sum(np.abs(DX[None] - DYp) ** p, axis=(1, 2)) / n**2
        if alpha > 0:
            vals += alpha * fc[np.arange(n)[None, :], chunk].sum(1) / n
        k = int(np.argmin(vals))
        if vals[k] < best:
            best, best_perm = float(vals[k]), chunk[k]
    plan = np.zeros((n, n))
    plan[np.arange(n), best_perm] = 1.0 / n
    tp = transport.TransportPlan(plan, best, solver="permutation-enumeration")
    return _result(best, p, "gw-brute", t0, tp, permutation=best_perm.tolist())


def fgw_entropic(X, Y, cfg=None, init="product", outer_tol=1e-7, max_outer=200):
    """Entropic fused GW by block-coordinate descent.

    Each outer step linearises the distortion at the current plan and solves
    the resulting fused linear problem with Sinkhorn (``cfg.epsilon``).  The
    returned value is the unregularised objective of the final plan after it
    has been rounded onto the exact marginals, i.e. an upper bound of FGW.
    """
    t0 = time.perf_counter()
    cfg = _cfg(cfg)
    X, Y = as_structured(X), as_structured(Y)
    if X.d != Y.d:
        raise DimensionMismatchError(f"feature dimensions differ: {X.d} vs {Y.d}")
    a, b = X.weights, Y.weights
    p, alpha = cfg.p, cfg.alpha
    if init == "product":
        T = np.outer(a, b)
    elif init == "identity":
        if X.n != Y.n:
            raise ValidationError("identity initialisation needs equally sized spaces")
        T = np.diag(a)
    else:
        raise ValueError(f"unknown initialisation {init!r}")
    M = feature_cost(X, Y, p) if alpha > 0 else 0.0
    potentials = None
    converged = False
    inner_ok = True
    it = 0
    for it in range(1, max_outer + 1):
        cost = alpha * M
        if alpha < 1:
            cost = cost + (1.0 - alpha) * 2.0 * distortion_tensor(X.distances, Y.distances, T, p)
        plan = transport.sinkhorn(cost, a, b, epsilon=cfg.epsilon, max_iter=cfg.max_iter,
                                  tol=cfg.tol, init=potentials)
        potentials = plan.extra["potentials"]
        inner_ok = inner_ok and plan.converged
        change = float(np.linalg.norm(plan.matrix - T))
        T = plan.matrix
        if change < outer_tol:
            converged = True
            break
    T = transport.round_to_marginals(T, a, b)
    value = fgw_objective(X, Y, T, alpha, p)
    tp = transport.TransportPlan(T, value, solver="fgw-bcd-sinkhorn", converged=converged,
                                 iterations=it, extra={"epsilon": cfg.epsilon})
    return _result(value, p, "fgw-entropic", t0, tp, inner_converged=inner_ok,
                   init=init, epsilon=cfg.epsilon)


# ---------------------------------------------------------------------------
# registry and pairwise jobs

BOUNDS = {
    "flb": lambda X, Y, cfg: flb(X, Y, cfg.p),
    "slb": lambda X, Y, cfg: slb(X, Y, cfg.p),
    "tlb": tlb,
    "ftlb": ftlb,
    "stlb": stlb,
    "sftlb": sftlb,
    "gw-brute": lambda X, Y, cfg: gw_bruteforce(X, Y, cfg.p, cfg.alpha),
    "fgw-entropic": fgw_entropic,
}


def compute(name, X, Y, cfg=None):
    """Evaluate the bound registered under ``name``."""
    try:
        fn = BOUNDS[name]
    except KeyError:
        raise DomainError(f"unknown bound {name!r}; choose from {sorted(BOUNDS)}") from None
    return fn(X, Y, _cfg(cfg))


def pairwise_distances(spaces, name, cfg=None):
    """Symmetric matrix of bound values over all pairs; zero diagonal.

    Sliced bounds share one projection set across all pairs, so the matrix
    inherits the triangle inequality.
    """
    cfg = _cfg(cfg)
    k = len(spaces)
    out = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            out[i, j] = out[j, i] = compute(name, spaces[i], spaces[j], cfg).value
    return out
