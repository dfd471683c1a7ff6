import numpy as np
import pytest

from gwbounds.bounds import BoundConfig, pairwise_distances
from gwbounds.datasets import make_shapes
from gwbounds.experiments import bench, classify_by_rank, isotest, knn_accuracy
from gwbounds.exceptions import DomainError
from gwbounds.graphs import GraphModel


def test_knn_separated_clusters():
    labels = np.repeat([0, 1, 2], 40)
    pts = labels[:, None] * 100.0 + np.random.default_rng(0).standard_normal((120, 2))
    D = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
    mean, std, per = knn_accuracy(D, labels, splits=20)
    assert mean == 1.0 and std == 0.0 and len(per) == 20


def test_knn_structureless_is_near_chance():
    rng = np.random.default_rng(1)
    labels = rng.integers(0, 2, 200)
    A = rng.random((200, 200))
    D = A + A.T
    np.fill_diagonal(D, 0)
    mean, _, _ = knn_accuracy(D, labels, splits=30)
    assert abs(mean - 0.5) < 0.06


def test_knn_is_deterministic_and_validates():
    D = np.random.default_rng(2).random((12, 12))
    D = D + D.T
    y = np.repeat([0, 1], 6)
    assert np.array_equal(knn_accuracy(D, y, seed=4)[2], knn_accuracy(D, y, seed=4)[2])
    with pytest.raises(DomainError):
        knn_accuracy(D, y[:-1])
    with pytest.raises(DomainError):
        knn_accuracy(D, y, k=5)


def test_synthetic_shapes_knn_under_stlb():
    spaces, labels = make_shapes(n_per_class=20, n_points=50, seed=0)
    D = pairwise_distances(spaces, "stlb", BoundConfig(r=20, num_projections=50))
    mean, _, _ = knn_accuracy(D, labels, splits=100)
    assert mean >= 0.95


def test_classify_by_rank():
    pred = classify_by_rank([0.3, 0.0, 0.2, 0.2, 0.9, 0.5])
    np.testing.assert_array_equal(pred, [False, True, True, True, False, False])
    # zeros always count as isomorphic, even beyond the closest half
    assert classify_by_rank([0.0, 0.0, 0.0, 1.0]).sum() == 3


def test_isotest_small_ws():
    res = isotest(GraphModel("ws", k=4, p_e=0.1), 10, pairs=40, repetitions=2,
                  methods=("stlb", "tlb", "wl-d"))
    assert res["stlb"][0] >= 0.9
    assert res["tlb"][0] >= 0.9
    assert len(res["wl-d"][2]) == 2


def test_isotest_all_isomorphic():
    res = isotest(GraphModel("ba", m=2), 12, pairs=10, repetitions=1,
                  methods=("stlb", "ftlb"), all_isomorphic=True)
    assert res["stlb"][0] == 1.0 and res["ftlb"][0] == 1.0


def test_isotest_wl_blind_on_regular_graphs():
    res = isotest(GraphModel("rr", R=3), 10, pairs=20, repetitions=2, methods=("wl-d",))
    assert res["wl-d"][0] == 0.5


def test_isotest_odd_pairs():
    with pytest.raises(DomainError):
        isotest(GraphModel("ws"), 10, pairs=3)


def test_bench_rows():
    rows = bench([20, 40], repeats=2, bounds=("ftlb", "sftlb", "tlb"))
    assert [(r[0], r[1]) for r in rows] == [
        ("ftlb", 20), ("sftlb", 20), ("tlb", 20), ("ftlb", 40), ("sftlb", 40), ("tlb", 40)]
    assert all(r[2] > 0 and r[3] >= 0 and r[4] > 0 for r in rows)
