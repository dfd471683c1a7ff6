"""Synthetic inputs: random Euclidean spaces and jittered 2D shape classes."""

import numpy as np

from .spaces import PointCloud, StructuredSpace, mm_from_point_cloud

SHAPE_CLASSES = ("ellipse", "star", "cross", "horseshoe")


def random_structured_space(rng, n, dim=2, feature_dim=0, weights=None):
    """Random Gaussian point cloud as a metric space, with normal features."""
    mm = mm_from_point_cloud(PointCloud(rng.standard_normal((n, dim)), weights))
    F = rng.standard_normal((n, feature_dim)) if feature_dim else None
    return StructuredSpace(mm, F)


def random_weights(rng, n):
    w = rng.random(n) + 0.05
    return w / w.sum()


def _curve(name, t):
    """Closed or open planar curve parametrised by ``t`` in [0, 1)."""
    if name == "ellipse":
        a = 2 * np.pi * t
        return np.column_stack([1.0 * np.cos(a), 0.5 * np.sin(a)])
    if name == "star":
        a = 2 * np.pi * t
        rad = 0.55 + 0.45 * np.cos(5 * a)
        return np.column_stack([rad * np.cos(a), rad * np.sin(a)])
    if name == "cross":
        # four arms of length 1 through the origin
        arm = np.floor(4 * t).astype(int)
        s = 4 * t - arm
        angles = arm * np.pi / 2
        return np.column_stack([s * np.cos(angles), s * np.sin(angles)])
    if name == "horseshoe":
        a = np.pi * (0.15 + 1.7 * t)
        return np.column_stack([np.cos(a), np.sin(a)])
    raise ValueError(f"unknown shape {name!r}")


def shape_points(name, n, rng, jitter=0.03):
    """``n`` jittered points on a randomly rotated and slightly rescaled shape.

    Curve parameters are stratified (one uniform draw per cell of width
    ``1/n``) so every sample covers the whole outline evenly.
    """
    t = (np.arange(n) + rng.random(n)) / n
    P = _curve(name, t)
    angle = rng.uniform(0, 2 * np.pi)
    rot = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
    P = P @ rot.T * rng.uniform(0.95, 1.05)
    return P + jitter * rng.standard_normal(P.shape)


def make_shapes(n_per_class=20, n_points=50, seed=0, jitter=0.03, classes=SHAPE_CLASSES):
    """Point-cloud metric spaces for each shape class, with integer labels."""
    rng = np.random.default_rng(seed)
    spaces, labels = [], []
    for label, name in enumerate(classes):
        for _ in range(n_per_class):
            spaces.append(mm_from_point_cloud(PointCloud(shape_points(name, n_points, rng, jitter))))
            labels.append(label)
    return spaces, np.array(labels)
