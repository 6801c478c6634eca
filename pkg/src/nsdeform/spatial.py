"""Geometric primitives: datasets, anchor sets, distances and scaling."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist


class DataError(ValueError):
    """Raised when input data violate a structural invariant."""


def as_points(points, dim: int | None = None) -> np.ndarray:
    """Coerce ``points`` to a float array of shape (n, p)."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None] if dim in (None, 1) else arr[None, :]
    if arr.ndim != 2:
        raise DataError(f"expected a 2-d array of points, got shape {arr.shape}")
    if dim is not None and arr.shape[1] != dim:
        raise DataError(f"dimension mismatch: expected {dim}, got {arr.shape[1]}")
    if not np.all(np.isfinite(arr)):
        raise DataError("coordinates must be finite")
    return arr


def _check_unique(coords: np.ndarray, what: str) -> None:
    _, first, counts = np.unique(coords, axis=0, return_index=True, return_counts=True)
    if np.any(counts > 1):
        dup = coords[first[counts > 1][0]]
        raise DataError(f"{what} contain duplicate coordinates, e.g. {dup.tolist()}")


@dataclass(frozen=True)
class Dataset:
    """Scalar observations of a single realization at distinct locations.

    Attributes
    ----------
    coords : ndarray, shape (n, p)
    values : ndarray, shape (n,)
    """

    coords: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        coords = as_points(self.coords)
        values = np.asarray(self.values, dtype=float).ravel()
        if coords.shape[1] not in (1, 2):
            raise DataError(f"only p in {{1, 2}} is supported, got p={coords.shape[1]}")
        if len(values) != len(coords):
            raise DataError(f"{len(coords)} locations but {len(values)} values")
        if len(values) < 2:
            raise DataError("a dataset needs at least 2 samples")
        if not np.all(np.isfinite(values)):
            raise DataError("values must be finite")
        _check_unique(coords, "data locations")
        coords.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        return Dataset(self.coords[idx], self.values[idx])


@dataclass(frozen=True)
class AnchorSet:
    """Representative locations on which the deformation is estimated."""

    points: np.ndarray

    def __post_init__(self):
        pts = as_points(self.points)
        m, p = pts.shape
        if m < p + 2:
            raise DataError(f"need at least p+2={p + 2} anchors, got {m}")
        _check_unique(pts, "anchors")
        if p == 2:
            centered = pts - pts.mean(axis=0)
            sv = np.linalg.svd(centered, compute_uv=False)
            if sv[-1] <= 1e-12 * max(sv[0], 1.0):
                raise DataError("anchors are collinear; the affine part is not identifiable")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def m(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class GaugeTransform:
    """Affine map ``u -> matrix @ u + offset`` with an invertible matrix."""

    matrix: np.ndarray
    offset: np.ndarray = field(default=None)

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if a.shape[0] != a.shape[1]:
            raise DataError("gauge matrix must be square")
        if abs(np.linalg.det(a)) == 0.0:
            raise DataError("gauge matrix must be invertible")
        b = np.zeros(a.shape[0]) if self.offset is None else np.asarray(self.offset, float).ravel()
        object.__setattr__(self, "matrix", a)
        object.__setattr__(self, "offset", b)

    def apply(self, points) -> np.ndarray:
        pts = as_points(points, self.matrix.shape[0])
        return pts @ self.matrix.T + self.offset

    @classmethod
    def similarity(cls, scale: float, rotation, offset) -> "GaugeTransform":
        """Homothety plus rotation ``u -> scale * R u + b``."""
        return cls(scale * np.atleast_2d(np.asarray(rotation, float)), offset)


def distance(a, b) -> float:
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if a.shape != b.shape:
        raise DataError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.sqrt(np.sum((a - b) ** 2)))


def pairwise_distances(points) -> np.ndarray:
    pts = as_points(points)
    if len(pts) < 2:
        raise DataError("need at least 2 points")
    d = cdist(pts, pts)
    np.fill_diagonal(d, 0.0)
    return d


def offdiag_mask(m: int) -> np.ndarray:
    return ~np.eye(m, dtype=bool)


def minmax_scale(matrix) -> np.ndarray:
    """Map off-diagonal entries linearly onto [0, 1]; the diagonal stays 0."""
    mat = np.asarray(matrix, dtype=float)
    mask = offdiag_mask(len(mat))
    off = mat[mask]
    lo, hi = off.min(), off.max()
    if not hi > lo:
        raise DataError("degenerate scaling: all off-diagonal entries are equal")
    out = np.zeros_like(mat)
    out[mask] = (off - lo) / (hi - lo)
    return out


def regular_grid(lower, upper, counts) -> np.ndarray:
    """Regular grid including the bounds, ``counts[k]`` nodes along axis k."""
    lower = np.atleast_1d(np.asarray(lower, float))
    upper = np.atleast_1d(np.asarray(upper, float))
    counts = np.atleast_1d(counts).astype(int)
    axes = [np.linspace(lo, hi, c) for lo, hi, c in zip(lower, upper, counts)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([g.ravel() for g in mesh])


def default_anchor_counts(n: int, dim: int, max_anchors: int = 125) -> list[int]:
    """Grid counts giving roughly ``min(max_anchors, n / 4)`` anchors."""
    target = max(dim + 2, min(max_anchors, n // 4))
    if dim == 1:
        return [target]
    side = max(3, int(np.floor(np.sqrt(target))))
    return [side, side]


def anchor_grid(data: Dataset, counts=None) -> AnchorSet:
    """Regular anchor grid over the bounding box of the data."""
    if counts is None:
        counts = default_anchor_counts(data.n, data.dim)
    lo, hi = data.coords.min(axis=0), data.coords.max(axis=0)
    return AnchorSet(regular_grid(lo, hi, counts))
