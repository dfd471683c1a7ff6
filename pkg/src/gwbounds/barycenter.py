"""Free-support Euclidean barycenters under TLB or STLB.

The barycenter is a uniform point cloud ``x_1..x_n`` in ``R^dim``; its
metric is the Euclidean one.  We minimise ``sum_k dist^2(X, Y_k)`` by plain
gradient descent with a constant step.  Gradients use the envelope rule:
the optimal outer plan (TLB) or the per-direction monotone matchings
(STLB) are held fixed, sort permutations are treated as locally constant
and the chain rule is applied through ``||x_i - x_l||``.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from . import transport
from ._util import project
from ._validation import is_uniform
from .exceptions import DomainError, ValidationError
from .quantile import midpoint_rule
from .sliced import sample_directions
from .spaces import as_mm, euclidean_distances

logger = logging.getLogger(__name__)

DIVERGENCE_LOSS = 1e12
_DIST_FLOOR = 1e-12


@dataclass(frozen=True)
class BarycenterConfig:
    """Descent settings; defaults follow 1000 steps of width 0.1 and three restarts."""

    n_points: int = 50
    dim: int = 2
    steps: int = 1000
    step_size: float = 0.1
    restarts: int = 3
    distance: str = "tlb"
    r: int = None
    num_projections: int = 100
    projection_seed: int = 0
    init: str = "random-normal"
    init_points: np.ndarray = None
    seed: int = 0

    def __post_init__(self):
        if self.steps < 1:
            raise DomainError("steps must be >= 1")
        if not self.step_size > 0:
            raise DomainError("step_size must be positive")
        if self.restarts < 1:
            raise DomainError("restarts must be >= 1")
        if self.distance not in ("tlb", "stlb"):
            raise DomainError(f"unknown barycenter distance {self.distance!r}")
        if self.init not in ("random-normal", "warm-start"):
            raise DomainError(f"unknown initialisation {self.init!r}")
        if self.init == "warm-start" and self.init_points is None:
            raise DomainError("warm-start needs init_points")


@dataclass(frozen=True, eq=False)
class BarycenterResult:
    points: np.ndarray
    loss_trace: np.ndarray
    best_restart: int
    final_losses: list = field(default_factory=list)
    traces: list = field(default_factory=list)
    aborted: list = field(default_factory=list)


def _check_targets(targets):
    targets = [as_mm(t) for t in targets]
    if not targets:
        raise ValidationError("at least one target is required")
    for t in targets:
        if not is_uniform(t.weights):
            raise ValidationError("barycenter targets must carry uniform weights")
    return targets


def _sorted_rows(D):
    order = np.argsort(D, axis=1, kind="stable")
    return np.take_along_axis(D, order, axis=1), order


def _grid(n, m):
    t = np.unique(np.concatenate([[0.0], np.arange(1, n + 1) / n, np.arange(1, m + 1) / m]))
    mass = np.diff(t)
    keep = mass > 0
    mids = 0.5 * (t[:-1] + t[1:])[keep]
    ia = np.minimum(np.searchsorted(np.arange(1, n + 1) / n, mids, side="right"), n - 1)
    ib = np.minimum(np.searchsorted(np.arange(1, m + 1) / m, mids, side="right"), m - 1)
    return ia, ib, mass[keep]


class _Objective:
    """Caches per-target data for repeated loss/gradient evaluations."""

    def __init__(self, targets, cfg, n):
        self.cfg = cfg
        self.targets = _check_targets(targets)
        self.n = n
        if cfg.distance == "tlb":
            self.target_sorted = [_sorted_rows(t.distances)[0] for t in self.targets]
        else:
            r = cfg.r if cfg.r is not None else max([n] + [t.n for t in self.targets])
            self.rule = midpoint_rule(r)
            self.sqrt_w = np.sqrt(self.rule.weights)
            self.proj = sample_directions(cfg.projection_seed, cfg.num_projections, r)
            self.target_proj = []
            for t in self.targets:
                S, _ = _sorted_rows(t.distances)
                idx = self._knot_index(t.n)
                self.target_proj.append(project(S[:, idx] * self.sqrt_w, self.proj.directions))

    def _knot_index(self, n):
        cum = np.arange(1, n + 1) / n
        return np.minimum(np.searchsorted(cum, self.rule.knots, side="right"), n - 1)

    def __call__(self, points):
        points = np.asarray(points, dtype=np.float64)
        D = euclidean_distances(points)
        S, order = _sorted_rows(D)
        if self.cfg.distance == "tlb":
            loss, gS = self._tlb(S)
        else:
            loss, gS = self._stlb(S)
        # scatter d loss / d sorted entries back onto matrix entries
        gD = np.zeros_like(D)
        np.put_along_axis(gD, order, gS, axis=1)
        np.fill_diagonal(gD, 0.0)
        sym = gD + gD.T
        safe = np.maximum(D, _DIST_FLOOR)
        coef = sym / safe
        np.fill_diagonal(coef, 0.0)
        grad = coef.sum(1)[:, None] * points - coef @ points
        return loss, grad

    def _tlb(self, S):
        n = self.n
        loss = 0.0
        gS = np.zeros_like(S)
        for T in self.target_sorted:
            m = T.shape[0]
            ia, ib, mass = _grid(n, m)
            QX, QY = S[:, ia], T[:, ib]
            cost = np.zeros((n, m))
            for g in range(len(mass)):
                diff = QX[:, g, None] - QY[None, :, g]
                cost += mass[g] * diff * diff
            plan = transport.exact_ot(cost, np.full(n, 1.0 / n), np.full(m, 1.0 / m))
            loss += plan.cost
            gamma = plan.matrix
            rows = gamma.sum(1)
            gQ = 2.0 * mass[None, :] * (rows[:, None] * QX - gamma @ QY)
            np.add.at(gS, (slice(None), ia), gQ)
        return loss, gS

    def _stlb(self, S):
        n = self.n
        idx = self._knot_index(n)
        E = S[:, idx] * self.sqrt_w
        P = project(E, self.proj.directions)
        L = P.shape[1]
        order = np.argsort(P, axis=0, kind="stable")
        Ps = np.take_along_axis(P, order, axis=0)
        loss = 0.0
        gP = np.zeros_like(P)
        for Pt in self.target_proj:
            m = Pt.shape[0]
            ia, ib, mass = _grid(n, m)
            diff = Ps[ia] - np.sort(Pt, axis=0)[ib]
            loss += float(np.mean(mass @ (diff * diff)))
            gPs = np.zeros_like(Ps)
            np.add.at(gPs, ia, 2.0 * mass[:, None] * diff / L)
            gP_t = np.zeros_like(P)
            np.put_along_axis(gP_t, order, gPs, axis=0)
            gP += gP_t
        gE = gP @ self.proj.directions
        gS = np.zeros_like(S)
        np.add.at(gS, (slice(None), idx), gE * self.sqrt_w)
        return loss, gS


def loss_and_gradient(points, targets, cfg):
    """``sum_k dist^2(points, Y_k)`` and its gradient w.r.t. ``points``."""
    points = np.asarray(points, dtype=np.float64)
    return _Objective(targets, cfg, points.shape[0])(points)


def _initial_points(cfg, restart):
    if cfg.init == "warm-start":
        return np.array(cfg.init_points, dtype=np.float64, copy=True)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([cfg.seed, restart])))
    return rng.standard_normal((cfg.n_points, cfg.dim))


def solve(targets, cfg):
    """Gradient descent from ``cfg.restarts`` starts; the lowest final loss wins."""
    n = cfg.n_points if cfg.init != "warm-start" else np.asarray(cfg.init_points).shape[0]
    objective = _Objective(targets, cfg, n)
    finals, traces, points_out, aborted = [], [], [], []
    for restart in range(cfg.restarts):
        x = _initial_points(cfg, restart)
        trace = []
        ok = True
        for _ in range(cfg.steps):
            loss, grad = objective(x)
            trace.append(loss)
            if not np.isfinite(loss) or loss > DIVERGENCE_LOSS:
                logger.warning("restart %d diverged (loss %.3g)", restart, loss)
                ok = False
                break
            x = x - cfg.step_size * grad
        if ok:
            loss, _ = objective(x)
            trace.append(loss)
            ok = np.isfinite(loss) and loss <= DIVERGENCE_LOSS
        aborted.append(not ok)
        finals.append(float(trace[-1]) if ok else np.inf)
        traces.append(np.array(trace))
        points_out.append(x)
    best = int(np.argmin(finals))
    return BarycenterResult(points_out[best], traces[best], best, finals, traces, aborted)
