"""Variogram cloud and the kernel estimator of the non-stationary variogram."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .spatial import Dataset, DataError, as_points


class EmptySupportError(ValueError):
    """No data pair carries positive kernel weight; the bandwidth is too small."""


@dataclass(frozen=True)
class KernelSpec:
    bandwidth: float

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise DataError(f"bandwidth must be positive, got {self.bandwidth}")


@dataclass(frozen=True)
class VariogramCloud:
    """Half squared increments for every ordered pair of samples.

    ``entries[i, j]`` is the value for the pair (i, j); row and column
    indices are the pair indices.
    """

    entries: np.ndarray

    def pairs(self):
        n = len(self.entries)
        i, j = np.nonzero(~np.eye(n, dtype=bool))
        return i, j, self.entries[i, j]


def epanechnikov(x, s, lam: float) -> float:
    """Unnormalized Epanechnikov weight ``1 - (d/lam)^2`` inside the support."""
    KernelSpec(lam)
    x = np.atleast_1d(np.asarray(x, float))
    s = np.atleast_1d(np.asarray(s, float))
    if x.shape != s.shape:
        raise DataError(f"dimension mismatch: {x.shape} vs {s.shape}")
    r2 = float(np.sum((x - s) ** 2)) / (lam * lam)
    return 1.0 - r2 if r2 <= 1.0 else 0.0


def epanechnikov_weights(x, coords, lam: float) -> np.ndarray:
    """Kernel weights of location ``x`` against every row of ``coords``."""
    d2 = np.sum((np.asarray(coords, float) - np.asarray(x, float)) ** 2, axis=1)
    r2 = d2 / (lam * lam)
    return np.where(r2 <= 1.0, 1.0 - r2, 0.0)


def variogram_cloud(data: Dataset) -> VariogramCloud:
    z = data.values
    return VariogramCloud(0.5 * (z[:, None] - z[None, :]) ** 2)


def ns_variogram(x, y, data: Dataset, lam: float) -> float:
    """Kernel-weighted local average of squared increments between x and y.

    Only samples inside the kernel support of ``x`` (rows) and of ``y``
    (columns) enter the double sum; diagonal pairs i == j are kept.
    """
    KernelSpec(lam)
    x = np.atleast_1d(np.asarray(x, float))
    y = np.atleast_1d(np.asarray(y, float))
    if np.array_equal(x, y):
        return 0.0
    wx = epanechnikov_weights(x, data.coords, lam)
    wy = epanechnikov_weights(y, data.coords, lam)
    ix = np.flatnonzero(wx)
    iy = np.flatnonzero(wy)
    if len(ix) == 0 or len(iy) == 0:
        raise EmptySupportError(
            f"no data within bandwidth {lam} of {x.tolist() if len(ix) == 0 else y.tolist()}; "
            "use a larger bandwidth"
        )
    z = data.values
    w = np.outer(wx[ix], wy[iy])
    sq = (z[ix][:, None] - z[iy][None, :]) ** 2
    return float(np.sum(w * sq) / (2.0 * np.sum(w)))


def kernel_moments(points, data: Dataset, lam: float):
    """Kernel mass and centred value moments of the data around each point.

    Returns ``(mass, first, second, shift)`` where the moments are of
    ``values - shift``; the estimator is invariant to the shift.
    """
    KernelSpec(lam)
    pts = np.ascontiguousarray(as_points(points, data.dim))
    shift = float(np.mean(data.values))
    zc = np.ascontiguousarray(data.values - shift)
    mass, first, second = _kernels.kernel_moments(
        pts, np.ascontiguousarray(data.coords), zc, float(lam)
    )
    return mass, first, second, shift


def ns_variogram_matrix(points, data: Dataset, lam: float) -> np.ndarray:
    """Estimator between all pairs of ``points``; uses kernel moments.

    Because the kernel factorizes, the double sum over data pairs reduces
    to products of per-point moments, which costs O(m n) overall.
    """
    mass, first, second, _ = kernel_moments(points, data, lam)
    empty = np.flatnonzero(mass <= 0)
    if len(empty) and len(mass) > 1:
        pts = as_points(points, data.dim)
        raise EmptySupportError(
            f"no data within bandwidth {lam} of point #{empty[0]} {pts[empty[0]].tolist()}; "
            "use a larger bandwidth"
        )
    num = second[:, None] * mass[None, :] + mass[:, None] * second[None, :]
    num -= 2.0 * first[:, None] * first[None, :]
    out = num / (2.0 * mass[:, None] * mass[None, :])
    np.maximum(out, 0.0, out=out)
    np.fill_diagonal(out, 0.0)
    return out
