"""scikit-learn compatible wrappers.

``BoundDistance`` maps a list of spaces to a distance matrix against the
spaces seen in ``fit``, so it chains with any estimator that accepts
``metric="precomputed"``::

    Pipeline([("dist", BoundDistance(bound="stlb", r=10)),
              ("knn", KNeighborsClassifier(3, metric="precomputed"))])
"""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import barycenter as _bary
from .bounds import BoundConfig, compute
from .exceptions import DomainError, ShapeError
from .quantile import fused_embedding, midpoint_rule
from .spaces import as_mm, as_structured


def _as_space_list(X):
    if isinstance(X, (list, tuple)):
        return [as_structured(x) for x in X]
    return [as_structured(X)]


class QuantileEmbedder(TransformerMixin, BaseEstimator):
    """Turn each space into its (fused) quantile embedding.

    ``transform`` returns one ``n_i x (r + d)`` array per input space.
    When ``r`` is None it is fixed in ``fit`` to the largest space size.
    """

    def __init__(self, r=None, alpha=0.0):
        self.r = r
        self.alpha = alpha

    def fit(self, X, y=None):
        spaces = _as_space_list(X)
        self.r_ = self.r if self.r is not None else max(s.n for s in spaces)
        self.rule_ = midpoint_rule(self.r_)
        return self

    def transform(self, X):
        check_is_fitted(self, "rule_")
        return [fused_embedding(s, self.rule_, self.alpha).vectors for s in _as_space_list(X)]


class BoundDistance(TransformerMixin, BaseEstimator):
    """Distances from each input space to every space passed to ``fit``."""

    def __init__(self, bound="stlb", p=2.0, alpha=0.0, r=None, num_projections=100,
                 seed=0, solver="exact", epsilon=1e-3):
        self.bound = bound
        self.p = p
        self.alpha = alpha
        self.r = r
        self.num_projections = num_projections
        self.seed = seed
        self.solver = solver
        self.epsilon = epsilon

    def config(self):
        return BoundConfig(p=self.p, alpha=self.alpha, r=self.r,
                           num_projections=self.num_projections, seed=self.seed,
                           solver=self.solver, epsilon=self.epsilon)

    def fit(self, X, y=None):
        self.reference_ = _as_space_list(X)
        self.config_ = self.config()
        return self

    def transform(self, X):
        check_is_fitted(self, "reference_")
        spaces = _as_space_list(X)
        out = np.zeros((len(spaces), len(self.reference_)))
        for i, s in enumerate(spaces):
            for j, t in enumerate(self.reference_):
                if s is t:
                    continue
                out[i, j] = compute(self.bound, s, t, self.config_).value
        return out


def knn_vote(dist_row, y_train, classes, k):
    """Majority class among the ``k`` nearest; ties go to the smaller summed
    distance, then to the lower class index."""
    nearest = np.argsort(dist_row, kind="stable")[:k]
    best = None
    for ci, c in enumerate(classes):
        mask = y_train[nearest] == c
        votes = int(mask.sum())
        if votes == 0:
            continue
        key = (-votes, float(dist_row[nearest][mask].sum()), ci)
        if best is None or key < best[0]:
            best = (key, c)
    return best[1]


class PrecomputedKNNClassifier(ClassifierMixin, BaseEstimator):
    """k-NN on precomputed distances with deterministic tie-breaking.

    ``fit`` takes the train-by-train distance matrix (only its shape is
    checked) and ``predict`` a test-by-train matrix.
    """

    def __init__(self, n_neighbors=3):
        self.n_neighbors = n_neighbors

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        if X.ndim != 2 or X.shape[0] != len(y):
            raise ShapeError("X must be a square train-by-train matrix aligned with y")
        if self.n_neighbors > len(y):
            raise DomainError(f"k = {self.n_neighbors} exceeds the {len(y)} training points")
        self.classes_ = np.unique(y)
        self.y_ = y
        return self

    def predict(self, X):
        check_is_fitted(self, "y_")
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != len(self.y_):
            raise ShapeError(f"expected {len(self.y_)} columns of train distances")
        return np.array([knn_vote(row, self.y_, self.classes_, self.n_neighbors) for row in X])


class FreeSupportBarycenter(BaseEstimator):
    """Euclidean barycenter of metric spaces under TLB or STLB."""

    def __init__(self, n_points=50, dim=2, steps=1000, step_size=0.1, restarts=3,
                 distance="tlb", r=None, num_projections=100, projection_seed=0,
                 init="random-normal", init_points=None, seed=0):
        self.n_points = n_points
        self.dim = dim
        self.steps = steps
        self.step_size = step_size
        self.restarts = restarts
        self.distance = distance
        self.r = r
        self.num_projections = num_projections
        self.projection_seed = projection_seed
        self.init = init
        self.init_points = init_points
        self.seed = seed

    def fit(self, X, y=None):
        targets = [as_mm(t) for t in (X if isinstance(X, (list, tuple)) else [X])]
        cfg = _bary.BarycenterConfig(**self.get_params())
        res = _bary.solve(targets, cfg)
        self.points_ = res.points
        self.loss_trace_ = res.loss_trace
        self.best_restart_ = res.best_restart
        self.result_ = res
        return self
