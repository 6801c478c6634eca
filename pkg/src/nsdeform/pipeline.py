"""End-to-end estimation of the deformation and the deformed-space variogram."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist

from .dissimilarity import CompositeDissimilarity, NmdsWeights, build
from .nmds import StressValue, nmds_fit
from .prediction import deform
from .spatial import AnchorSet, Dataset, as_points
from .tps import FoldReport, ThinPlateSpline, fold_check, probe_grid, tps_fit
from .variogram import ExperimentalVariogram, MixtureVariogram, experimental_variogram, fit_mixture


@dataclass
class DeformationFit:
    """Everything produced by one run of the estimation workflow."""

    spline: ThinPlateSpline | None
    model: MixtureVariogram
    lam: float
    omega: float
    anchors: AnchorSet | None = None
    images: np.ndarray | None = None
    stress: StressValue | None = None
    delta: CompositeDissimilarity | None = None
    weights: NmdsWeights | None = None
    experimental: ExperimentalVariogram | None = None
    fold: FoldReport | None = None
    meta: dict = field(default_factory=dict)

    @property
    def stationary(self) -> bool:
        return self.spline is None

    def deform(self, points) -> np.ndarray:
        return deform(self.spline, points)


LAG_COUNT = 30
LAG_FRACTION = 0.25


def fit_model(u, values, n_lags: int = LAG_COUNT, max_dist: float | None = None,
              dictionary=None):
    """Experimental variogram of ``values`` at ``u`` and its mixture fit.

    ``max_dist`` defaults to a quarter of the largest pairwise distance so
    that short lags, which drive kriging, are finely resolved.
    """
    if max_dist is None:
        max_dist = LAG_FRACTION * float(pdist(as_points(u)).max())
    ev = experimental_variogram(u, values, n_lags=n_lags, max_dist=max_dist)
    return ev, fit_mixture(ev, dictionary)


def fit_deformation(data: Dataset, anchors: AnchorSet, lam: float, omega: float,
                    tol: float = 1e-6, max_iter: int = 500, n_lags: int = LAG_COUNT,
                    check_folds: bool = True) -> DeformationFit:
    """Dissimilarities, NMDS, thin-plate spline, then the stationary model."""
    delta, weights = build(anchors, data, lam, omega)
    U, st = nmds_fit(delta, weights, anchors, tol=tol, max_iter=max_iter)
    spline = tps_fit(anchors, U)
    u = deform(spline, data.coords)
    ev, model = fit_model(u, data.values, n_lags=n_lags)
    fold = fold_check(spline, probe_grid(anchors.points)) if check_folds else None
    return DeformationFit(spline, model, lam, omega, anchors, U, st, delta, weights, ev, fold)


def fit_stationary(data: Dataset, n_lags: int = LAG_COUNT) -> DeformationFit:
    """Stationary benchmark: the same variogram fit on geographic coordinates."""
    ev, model = fit_model(data.coords, data.values, n_lags=n_lags)
    return DeformationFit(None, model, float("nan"), float("nan"), experimental=ev)
