"""Weighted non-metric multidimensional scaling of the anchor points.

The configuration update is a weighted Guttman transform (majorization)
towards the current monotone fit of the dissimilarities, followed by a
step-halving line search so that the recorded stress never increases.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist

from . import _kernels
from .dissimilarity import CompositeDissimilarity, NmdsWeights
from .spatial import AnchorSet, DataError

log = logging.getLogger(__name__)


class StressIncreaseError(RuntimeError):
    """The stress went up although every accepted step must decrease it."""

    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class MonotoneFit:
    fitted: np.ndarray
    order: np.ndarray


@dataclass
class StressValue:
    value: float
    trace: list = field(default_factory=list)

    def rows(self):
        """(iteration, stress) rows for diagnostics output."""
        return list(enumerate(self.trace))


def _as_matrix(obj):
    if isinstance(obj, CompositeDissimilarity):
        return obj.delta
    if isinstance(obj, NmdsWeights):
        return obj.weights
    return np.asarray(obj, dtype=float)


def _tie_order(keys, targets):
    # primary treatment of ties: within equal keys, order by target so the
    # tie block imposes no constraint; pair index breaks remaining ties
    return np.lexsort((np.arange(len(keys)), targets, keys))


def weighted_isotonic_regression(targets, keys, weights) -> MonotoneFit:
    """Weighted least-squares fit of ``targets`` non-decreasing in ``keys``."""
    targets = np.asarray(targets, dtype=float)
    keys = np.asarray(keys, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if not (len(targets) == len(keys) == len(weights)):
        raise DataError("targets, keys and weights must have equal lengths")
    if np.any(weights < 0):
        raise DataError("weights must be non-negative")
    if not np.any(weights > 0):
        raise DataError("at least one weight must be positive")
    order = _tie_order(keys, targets)
    fitted_sorted = _kernels.pava_sorted(
        np.ascontiguousarray(targets[order]), np.ascontiguousarray(weights[order])
    )
    fitted = np.empty_like(fitted_sorted)
    fitted[order] = fitted_sorted
    return MonotoneFit(fitted, order)


def _stress_from_distances(h, delta, w):
    fit = weighted_isotonic_regression(h, delta, w)
    denom = float(np.sum(w * h * h))
    if denom <= 0:
        raise DataError("degenerate configuration: all weighted distances are zero")
    return np.sqrt(float(np.sum(w * (fit.fitted - h) ** 2)) / denom), fit.fitted


def stress(U, delta, weights) -> StressValue:
    """Normalized weighted stress of configuration ``U``."""
    U = np.asarray(U, dtype=float)
    if U.ndim == 1:
        U = U[:, None]
    D = _as_matrix(delta)
    P = _as_matrix(weights)
    if D.shape != (len(U), len(U)) or P.shape != D.shape:
        raise DataError("configuration, dissimilarity and weight sizes disagree")
    iu = np.triu_indices(len(U), k=1)
    value, _ = _stress_from_distances(pdist(U), D[iu], P[iu])
    return StressValue(value, [value])


def nmds_fit(delta, weights, X_init, tol: float = 1e-6, max_iter: int = 500,
             max_halvings: int = 30):
    """Fit anchor images minimizing the weighted stress, starting at ``X_init``.

    Returns
    -------
    U : ndarray, shape (m, p)
    stress : StressValue
        Final stress and the per-iteration trace (non-increasing).
    """
    if not tol > 0:
        raise DataError("tol must be positive")
    X = X_init.points if isinstance(X_init, AnchorSet) else np.asarray(X_init, float)
    if X.ndim == 1:
        X = X[:, None]
    D = _as_matrix(delta)
    P = _as_matrix(weights)
    m = len(X)
    if D.shape != (m, m) or P.shape != (m, m):
        raise DataError("dissimilarity/weight matrices must match the anchor count")
    iu = np.triu_indices(m, k=1)
    dvec, wvec = D[iu], P[iu]
    if not np.any(wvec > 0):
        raise DataError("all NMDS weights are zero; increase the bandwidth")

    W = np.zeros((m, m))
    W[iu] = wvec
    W += W.T
    V = np.diag(W.sum(axis=1)) - W
    V_pinv = np.linalg.pinv(V)

    U = np.array(X, dtype=float)
    cur, fitted = _stress_from_distances(pdist(U), dvec, wvec)
    trace = [cur]
    for it in range(max_iter):
        if cur <= 1e-14:
            break
        h = pdist(U)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(h > 0, fitted / h, 0.0)
        B = np.zeros((m, m))
        B[iu] = -wvec * ratio
        B += B.T
        B[np.diag_indices(m)] = -B.sum(axis=1)
        step = V_pinv @ (B @ U) - U

        t, accepted = 1.0, False
        for _ in range(max_halvings):
            cand = U + t * step
            try:
                new, new_fit = _stress_from_distances(pdist(cand), dvec, wvec)
            except DataError:
                new = np.inf
            if new < cur:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            log.debug("nmds: no decrease after %d halvings at iteration %d", max_halvings, it)
            break
        if new > trace[-1]:
            raise StressIncreaseError(f"stress increased at iteration {it}", trace)
        rel = (cur - new) / cur
        U, cur, fitted = cand, new, new_fit
        trace.append(cur)
        if rel < tol:
            break
    return normalize_gauge(U, X), StressValue(cur, trace)


def normalize_gauge(U, X):
    """Translate and rescale ``U`` to the centroid and spread of ``X``.

    Stress is invariant to this, so it only fixes the free scale of the
    deformed space to that of the geographic one.
    """
    uc = U - U.mean(axis=0)
    xc = X - X.mean(axis=0)
    su = np.sqrt(np.mean(np.sum(uc ** 2, axis=1)))
    sx = np.sqrt(np.mean(np.sum(xc ** 2, axis=1)))
    if su == 0:
        return U
    return uc * (sx / su) + X.mean(axis=0)
