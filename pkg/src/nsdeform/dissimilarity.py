"""Composite anchor dissimilarities and the NMDS pair weights."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernel import KernelSpec, kernel_moments, ns_variogram_matrix
from .spatial import AnchorSet, Dataset, DataError, minmax_scale, pairwise_distances


@dataclass(frozen=True)
class CompositeDissimilarity:
    delta: np.ndarray
    lam: float
    omega: float


@dataclass(frozen=True)
class NmdsWeights:
    weights: np.ndarray


def gamma_matrix(anchors: AnchorSet, data: Dataset, lam: float) -> np.ndarray:
    """Kernel variogram estimate between every pair of anchors."""
    return ns_variogram_matrix(anchors.points, data, lam)


def composite(gamma, distances, omega: float, lam: float = float("nan")) -> CompositeDissimilarity:
    """Convex mix of the scaled variogram and scaled distance matrices."""
    if not 0.0 <= omega <= 1.0:
        raise DataError(f"omega must lie in [0, 1], got {omega}")
    gamma = np.asarray(gamma, float)
    distances = np.asarray(distances, float)
    if gamma.shape != distances.shape:
        raise DataError(f"shape mismatch: {gamma.shape} vs {distances.shape}")
    d_scaled = minmax_scale(distances)
    if omega == 0.0:
        delta = d_scaled
    else:
        g_scaled = minmax_scale(gamma)
        delta = g_scaled if omega == 1.0 else omega * g_scaled + (1.0 - omega) * d_scaled
    return CompositeDissimilarity(delta, lam, omega)


def nmds_weights(anchors: AnchorSet, data: Dataset, lam: float) -> NmdsWeights:
    """Total kernel mass of each anchor pair divided by the anchor distance.

    The product kernel makes the mass of pair (i, j) the product of the
    per-anchor masses.
    """
    KernelSpec(lam)
    mass, _, _, _ = kernel_moments(anchors.points, data, lam)
    dist = pairwise_distances(anchors.points)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.outer(mass, mass) / dist
    np.fill_diagonal(w, 0.0)
    return NmdsWeights(w)


def build(anchors: AnchorSet, data: Dataset, lam: float, omega: float):
    """Dissimilarity matrix and weights for one hyper-parameter pair."""
    dist = pairwise_distances(anchors.points)
    gamma = gamma_matrix(anchors, data, lam) if omega > 0 else np.zeros_like(dist)
    return composite(gamma, dist, omega, lam), nmds_weights(anchors, data, lam)
