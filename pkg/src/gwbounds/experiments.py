"""Experiment harnesses behind the CLI: KNN evaluation, isomorphism tests, timings."""

import time
from dataclasses import replace

import numpy as np

from .bounds import BoundConfig, compute, ftlb
from .datasets import random_structured_space
from .estimators import PrecomputedKNNClassifier
from .exceptions import DomainError
from .graphs import make_graph_pair, structured_space, wl_refinement

WL_METHODS = {"wl-d": "degree", "wl-f": "feature-binned"}


def _rng(*key):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(list(key))))


# ---------------------------------------------------------------------------
# KNN on a precomputed distance matrix


def knn_accuracy(D, labels, k=3, splits=100, train_frac=0.25, seed=0):
    """Accuracy over random train/test splits; returns ``(mean, std, per_split)``.

    Split ``s`` is drawn from ``SeedSequence([seed, s])``.
    """
    D = np.asarray(D, dtype=np.float64)
    labels = np.asarray(labels)
    N = len(labels)
    if D.shape != (N, N):
        raise DomainError(f"distance matrix shape {D.shape} does not match {N} labels")
    n_train = int(round(train_frac * N))
    if not 0 < n_train < N:
        raise DomainError("train_frac leaves an empty train or test set")
    if k > n_train:
        raise DomainError(f"k = {k} exceeds the training set size {n_train}")
    accs = np.empty(splits)
    for s in range(splits):
        perm = _rng(seed, s).permutation(N)
        tr, te = np.sort(perm[:n_train]), np.sort(perm[n_train:])
        clf = PrecomputedKNNClassifier(k).fit(D[np.ix_(tr, tr)], labels[tr])
        accs[s] = np.mean(clf.predict(D[np.ix_(te, tr)]) == labels[te])
    return float(accs.mean()), float(accs.std()), accs


# ---------------------------------------------------------------------------
# graph isomorphism testing


def classify_by_rank(distances):
    """Isomorphic iff exactly zero or among the closest half (stable by index)."""
    d = np.asarray(distances, dtype=np.float64)
    order = np.lexsort((np.arange(len(d)), d))
    pred = np.zeros(len(d), dtype=bool)
    pred[order[: len(d) // 2]] = True
    pred |= d == 0
    return pred


def isotest(model, n, pairs=200, methods=("stlb",), cfg=None, seed=0, repetitions=5,
            all_isomorphic=False):
    """Accuracy of each method on balanced batches of isomorphic/non-isomorphic pairs.

    Pair ``i`` of repetition ``rep`` is built from seed ``(seed, rep, i)``;
    the first half of every batch is isomorphic.  Returns
    ``{method: (mean, std, per_repetition)}``.
    """
    if pairs % 2:
        raise DomainError("pairs must be even")
    cfg = cfg if cfg is not None else BoundConfig(r=5, num_projections=100)
    acc = {m: [] for m in methods}
    for rep in range(repetitions):
        truth = np.zeros(pairs, dtype=bool)
        graphs = []
        for i in range(pairs):
            iso = all_isomorphic or i < pairs // 2
            truth[i] = iso
            graphs.append(make_graph_pair(model, n, (seed, rep, i), iso))
        spaces = [(structured_space(g1), structured_space(g2)) for g1, g2, _ in graphs]
        for method in methods:
            if method in WL_METHODS:
                pred = np.array([
                    wl_refinement(g1, g2, 5, WL_METHODS[method]) == "possibly-isomorphic"
                    for g1, g2, _ in graphs
                ])
            else:
                d = np.array([compute(method, X, Y, cfg).value for X, Y in spaces])
                pred = classify_by_rank(d) if not all_isomorphic else d == 0
            acc[method].append(float(np.mean(pred == truth)))
    return {m: (float(np.mean(v)), float(np.std(v)), v) for m, v in acc.items()}


# ---------------------------------------------------------------------------
# runtime benchmark


def _time_bound(name, X, Y, cfg):
    t0 = time.perf_counter()
    if name == "ftlb" and cfg.r is not None:
        ftlb(X, Y, cfg, method="embedding")
    elif name == "ftlb-entropic":
        ftlb(X, Y, replace(cfg, solver="sinkhorn"), method="embedding" if cfg.r else "direct")
    else:
        compute(name, X, Y, cfg)
    return time.perf_counter() - t0


def bench(sizes, repeats=5, bounds=("ftlb", "sftlb"), cfg=None, seed=0, dim=2):
    """Wall-clock seconds per bound and size on random point-cloud pairs with 1D features.

    Returns rows ``(bound, n, mean, std, median)``.
    """
    cfg = cfg if cfg is not None else BoundConfig(alpha=0.5, r=10, num_projections=50)
    rows = []
    for n in sizes:
        pairs = []
        for rep in range(repeats):
            rng = _rng(seed, n, rep)
            pairs.append((random_structured_space(rng, n, dim, 1),
                          random_structured_space(rng, n, dim, 1)))
        for name in bounds:
            times = np.array([_time_bound(name, X, Y, cfg) for X, Y in pairs])
            rows.append((name, n, float(times.mean()), float(times.std()),
                         float(np.median(times))))
    return rows
