import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gwbounds.exceptions import (
    AsymmetryError,
    DiagonalError,
    FeatureRowMismatchError,
    NegativeEntryError,
    NonFiniteError,
    ParseError,
    TriangleInequalityError,
    WeightSumError,
)
from gwbounds.spaces import (
    MmSpace,
    PointCloud,
    StructuredSpace,
    load_space,
    mm_from_point_cloud,
    save_space,
    validate,
)


def test_single_point_cloud():
    mm = mm_from_point_cloud(PointCloud(np.zeros((1, 2))))
    np.testing.assert_array_equal(mm.distances, [[0.0]])
    np.testing.assert_array_equal(mm.weights, [1.0])


def test_line_points():
    mm = mm_from_point_cloud(PointCloud(np.array([[0.0], [3.0]])))
    np.testing.assert_array_equal(mm.distances, [[0, 3], [3, 0]])


def test_345_triangle():
    mm = mm_from_point_cloud(PointCloud(np.array([[0.0, 0.0], [3.0, 4.0]])))
    assert mm.distances[0, 1] == 5.0


def test_point_cloud_rejects_nonfinite():
    with pytest.raises(NonFiniteError):
        PointCloud(np.array([[0.0, np.nan]]))


def test_validate_ok_and_weight_errors():
    validate(MmSpace(np.array([[0, 1.0], [1.0, 0]])))
    with pytest.raises(WeightSumError):
        MmSpace(np.array([[0, 1.0], [1.0, 0]]), np.array([0.45, 0.45]))


def test_weights_renormalised_within_tolerance():
    mm = MmSpace(np.array([[0, 1.0], [1.0, 0]]), np.array([0.5, 0.5 + 5e-7]))
    assert abs(mm.weights.sum() - 1.0) < 1e-15


@pytest.mark.parametrize("D, err", [
    ([[0, 1], [2, 0]], AsymmetryError),
    ([[1, 1], [1, 0]], DiagonalError),
    ([[0, -1], [-1, 0]], NegativeEntryError),
    ([[0, np.inf], [np.inf, 0]], NonFiniteError),
])
def test_distinct_validation_errors(D, err):
    with pytest.raises(err):
        MmSpace(np.array(D, dtype=float))


def test_triangle_only_in_strict_mode():
    D = np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]], dtype=float)
    mm = MmSpace(D)
    validate(mm)
    with pytest.raises(TriangleInequalityError):
        validate(mm, strict=True)


def test_feature_row_mismatch():
    with pytest.raises(FeatureRowMismatchError):
        StructuredSpace(MmSpace(np.zeros((3, 3))), np.zeros((2, 1)))


def test_empty_features_are_legal():
    s = StructuredSpace(MmSpace(np.zeros((3, 3))))
    assert s.d == 0 and s.features.shape == (3, 0)


def test_spaces_are_immutable():
    mm = MmSpace(np.array([[0, 1.0], [1.0, 0]]))
    with pytest.raises(ValueError):
        mm.distances[0, 1] = 3.0


def test_load_csv_matrix(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("0,1\n1,0\n")
    s = load_space(p)
    assert s.n == 2 and s.d == 0
    np.testing.assert_array_equal(s.weights, [0.5, 0.5])


def test_load_json_weights_preserved(tmp_path):
    p = tmp_path / "a.json"
    p.write_text(json.dumps({"distances": [[0, 1], [1, 0]], "weights": [0.25, 0.75]}))
    np.testing.assert_array_equal(load_space(p).weights, [0.25, 0.75])


def test_load_json_feature_mismatch(tmp_path):
    p = tmp_path / "a.json"
    p.write_text(json.dumps({"distances": [[0, 1, 1], [1, 0, 1], [1, 1, 0]],
                             "features": [[0.0], [1.0]]}))
    with pytest.raises(FeatureRowMismatchError):
        load_space(p)


def test_parse_error_carries_location(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("0,1\n1,x\n")
    with pytest.raises(ParseError) as info:
        load_space(p)
    assert info.value.line == 2 and "column 1" in info.value.field
    assert str(p) in str(info.value)


def test_json_syntax_error(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"distances": [[0, 1], [1, 0]')
    with pytest.raises(ParseError):
        load_space(p)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 7), st.integers(1, 3)),
              elements=st.floats(-1e3, 1e3)),
       st.integers(0, 3))
def test_point_cloud_metric_is_strictly_valid(P, d):
    mm = mm_from_point_cloud(PointCloud(P))
    validate(mm, strict=True)


@settings(max_examples=25, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 3)),
              elements=st.floats(-1e6, 1e6)),
       st.booleans())
def test_save_load_roundtrip(tmp_path_factory, P, with_features):
    path = tmp_path_factory.mktemp("rt")
    mm = mm_from_point_cloud(PointCloud(P))
    F = P[:, :1] if with_features else None
    s = StructuredSpace(mm, F)
    for name in ("s.csv", "s.json"):
        save_space(s, path / name)
        back = load_space(path / name)
        np.testing.assert_array_equal(back.distances, s.distances)
        np.testing.assert_array_equal(back.weights, s.weights)
        if name.endswith(".json"):
            np.testing.assert_array_equal(back.features, s.features)
