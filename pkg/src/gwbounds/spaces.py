"""Finite metric measure spaces, structured spaces and point clouds.

All containers are immutable: arrays are copied on construction and
flagged read-only.  Construction runs the permissive checks; the O(n^3)
triangle-inequality check is only performed by ``validate(..., strict=True)``.
"""

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._util import pairwise_sq_dists
from ._validation import as_float_array, check_probability_vector, frozen
from .exceptions import (
    AsymmetryError,
    DiagonalError,
    FeatureRowMismatchError,
    NegativeEntryError,
    NonFiniteError,
    ParseError,
    ShapeError,
    TriangleInequalityError,
    ValidationError,
    WeightSumError,
)

SYMMETRY_TOL = 1e-12
TRIANGLE_TOL = 1e-9


def _check_distances(D):
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ShapeError(f"distance matrix must be square, got shape {D.shape}")
    if D.shape[0] == 0:
        raise ShapeError("distance matrix must be non-empty")
    if not np.all(np.isfinite(D)):
        raise NonFiniteError("distance matrix contains non-finite entries")
    if np.any(D < 0):
        raise NegativeEntryError("distance matrix has negative entries")
    if np.any(np.diag(D) != 0):
        raise DiagonalError("distance matrix has a nonzero diagonal")
    scale = max(1.0, float(D.max()))
    if np.max(np.abs(D - D.T)) > SYMMETRY_TOL * scale:
        raise AsymmetryError("distance matrix is not symmetric")


def _check_triangle(D):
    n = D.shape[0]
    scale = max(1.0, float(D.max()))
    for k in range(n):
        # D[i, j] <= D[i, k] + D[k, j] for every i, j
        excess = D - (D[:, k, None] + D[None, k, :])
        if excess.max() > TRIANGLE_TOL * scale:
            i, j = np.unravel_index(np.argmax(excess), excess.shape)
            raise TriangleInequalityError(
                f"triangle inequality violated at ({i}, {j}) via {k}"
            )


@dataclass(frozen=True, eq=False)
class MmSpace:
    """Finite metric measure space ``(distances, weights)``.

    ``weights`` defaults to the uniform measure.
    """

    distances: np.ndarray
    weights: np.ndarray = None

    def __post_init__(self):
        D = np.asarray(self.distances, dtype=np.float64)
        _check_distances(D)
        D = 0.5 * (D + D.T)
        n = D.shape[0]
        if self.weights is None:
            w = np.full(n, 1.0 / n)
        else:
            w = check_probability_vector(self.weights, "weights", size=n)
        object.__setattr__(self, "distances", frozen(D))
        object.__setattr__(self, "weights", frozen(w))

    @property
    def n(self):
        return self.distances.shape[0]

    def permuted(self, perm):
        """Relabel points: point ``i`` of the result is point ``perm[i]`` here."""
        perm = np.asarray(perm)
        return MmSpace(self.distances[np.ix_(perm, perm)], self.weights[perm])

    def scaled(self, factor):
        return MmSpace(self.distances * factor, self.weights)


@dataclass(frozen=True, eq=False)
class StructuredSpace:
    """An :class:`MmSpace` whose points carry ``d``-dimensional features.

    ``d = 0`` (no features) is legal.
    """

    base: MmSpace
    features: np.ndarray = None

    def __post_init__(self):
        if not isinstance(self.base, MmSpace):
            raise ValidationError("base must be an MmSpace")
        n = self.base.n
        if self.features is None:
            F = np.zeros((n, 0))
        else:
            F = np.asarray(self.features, dtype=np.float64)
            if F.ndim == 1:
                F = F[:, None]
            if F.ndim != 2:
                raise ShapeError(f"features must be 2-dimensional, got {F.shape}")
            if F.shape[0] != n:
                raise FeatureRowMismatchError(
                    f"{F.shape[0]} feature rows for {n} points"
                )
            if not np.all(np.isfinite(F)):
                raise NonFiniteError("features contain non-finite entries")
        object.__setattr__(self, "features", frozen(F))

    @classmethod
    def from_arrays(cls, distances, weights=None, features=None):
        return cls(MmSpace(distances, weights), features)

    @property
    def n(self):
        return self.base.n

    @property
    def d(self):
        return self.features.shape[1]

    @property
    def distances(self):
        return self.base.distances

    @property
    def weights(self):
        return self.base.weights

    def permuted(self, perm):
        perm = np.asarray(perm)
        return StructuredSpace(self.base.permuted(perm), self.features[perm])

    def scaled(self, factor):
        return StructuredSpace(self.base.scaled(factor), self.features * factor)


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Weighted Euclidean point set; ``weights`` defaults to uniform."""

    points: np.ndarray
    weights: np.ndarray = None

    def __post_init__(self):
        P = as_float_array(self.points, "points")
        if P.ndim == 1:
            P = P[:, None]
        if P.ndim != 2 or P.shape[0] == 0:
            raise ShapeError(f"points must be a non-empty 2-d array, got {P.shape}")
        n = P.shape[0]
        if self.weights is None:
            w = np.full(n, 1.0 / n)
        else:
            w = check_probability_vector(self.weights, "weights", size=n)
        object.__setattr__(self, "points", frozen(P))
        object.__setattr__(self, "weights", frozen(w))

    @property
    def n(self):
        return self.points.shape[0]


def as_structured(space):
    if isinstance(space, StructuredSpace):
        return space
    if isinstance(space, MmSpace):
        return StructuredSpace(space)
    raise ValidationError(f"expected MmSpace or StructuredSpace, got {type(space)!r}")


def as_mm(space):
    if isinstance(space, StructuredSpace):
        return space.base
    if isinstance(space, MmSpace):
        return space
    raise ValidationError(f"expected MmSpace or StructuredSpace, got {type(space)!r}")


def euclidean_distances(points):
    P = np.asarray(points, dtype=np.float64)
    D = np.sqrt(pairwise_sq_dists(P, P))
    np.fill_diagonal(D, 0.0)
    return D


def mm_from_point_cloud(pc):
    """Metric measure space of a point cloud under the Euclidean metric."""
    if not isinstance(pc, PointCloud):
        pc = PointCloud(pc)
    return MmSpace(euclidean_distances(pc.points), pc.weights)


def validate(space, strict=False):
    """Re-check every invariant of ``space``; raise on the first failure.

    With ``strict=True`` the triangle inequality is verified too (O(n^3)).
    """
    if isinstance(space, StructuredSpace):
        base = space.base
        if space.features.shape[0] != base.n:
            raise FeatureRowMismatchError(
                f"{space.features.shape[0]} feature rows for {base.n} points"
            )
        if not np.all(np.isfinite(space.features)):
            raise NonFiniteError("features contain non-finite entries")
    elif isinstance(space, MmSpace):
        base = space
    else:
        raise ValidationError(f"cannot validate object of type {type(space)!r}")
    D = np.asarray(base.distances)
    _check_distances(D)
    w = np.asarray(base.weights)
    if np.any(w < 0):
        raise NegativeEntryError("weights have negative entries")
    if abs(w.sum() - 1.0) > 1e-12:
        raise WeightSumError(f"weights sum to {w.sum()!r}")
    if strict:
        _check_triangle(D)


# ---------------------------------------------------------------------------
# file formats


def _parse_csv_matrix(path):
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            values = []
            for col, cell in enumerate(row):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise ParseError(
                        path, f"not a number: {cell!r}", line=lineno, field=f"column {col}"
                    ) from None
            if rows and len(values) != len(rows[0]):
                raise ParseError(
                    path, f"expected {len(rows[0])} values, got {len(values)}", line=lineno
                )
            rows.append(values)
    if not rows:
        raise ParseError(path, "empty matrix")
    return np.array(rows, dtype=np.float64)


def _json_matrix(path, obj, key):
    value = obj.get(key)
    try:
        arr = np.array(value, dtype=np.float64)
    except (TypeError, ValueError):
        raise ParseError(path, "expected an array of numeric arrays", field=key) from None
    return arr


def _parse_json_structured(path):
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(path, exc.msg, line=exc.lineno, field=f"column {exc.colno}") from None
    if not isinstance(obj, dict) or "distances" not in obj:
        raise ParseError(path, "expected an object with key 'distances'")
    D = _json_matrix(path, obj, "distances")
    if D.ndim != 2:
        raise ParseError(path, "distances must be a 2-d array", field="distances")
    w = None
    if obj.get("weights") is not None:
        w = _json_matrix(path, obj, "weights")
    F = None
    if obj.get("features") is not None:
        F = _json_matrix(path, obj, "features")
        if F.size == 0:
            F = np.zeros((len(obj["features"]), 0))
    return D, w, F


def load_space(path, format=None):
    """Read a :class:`StructuredSpace` from ``csv-matrix`` or ``json-structured``.

    When ``format`` is omitted it is inferred from the file suffix.
    CSV matrices get uniform weights and no features.
    """
    path = Path(path)
    if format is None:
        format = "json-structured" if path.suffix.lower() == ".json" else "csv-matrix"
    if format == "csv-matrix":
        D = _parse_csv_matrix(path)
        return StructuredSpace(MmSpace(D))
    if format == "json-structured":
        D, w, F = _parse_json_structured(path)
        return StructuredSpace(MmSpace(D, w), F)
    raise ValueError(f"unknown space format {format!r}")


def save_space(space, path, format=None):
    """Write ``space``; values use 17 significant digits so loading round-trips."""
    space = as_structured(space)
    path = Path(path)
    if format is None:
        format = "json-structured" if path.suffix.lower() == ".json" else "csv-matrix"
    if format == "csv-matrix":
        np.savetxt(path, space.distances, delimiter=",", fmt="%.17g")
    elif format == "json-structured":
        obj = {
            "distances": space.distances.tolist(),
            "weights": space.weights.tolist(),
        }
        if space.d:
            obj["features"] = space.features.tolist()
        with open(path, "w") as fh:
            json.dump(obj, fh)
    else:
        raise ValueError(f"unknown space format {format!r}")
