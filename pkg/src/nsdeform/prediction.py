"""Kriging and Gaussian simulation through a fitted deformation.

Everything happens on deformed coordinates: data and targets are pushed
forward through the spline and the stationary model is applied to the
Euclidean distances between their images.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as spl
from scipy.spatial.distance import cdist, pdist

from .spatial import Dataset, DataError, as_points
from .tps import ThinPlateSpline, tps_eval
from .variogram import MixtureVariogram

DENSE_CAP = 4000


class KrigingError(np.linalg.LinAlgError):
    pass


class SimulationError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class KrigingResult:
    estimate: float
    variance: float
    weights: np.ndarray
    lagrange: float


@dataclass(frozen=True)
class MeanModel:
    mean: float

    def __post_init__(self):
        if not np.isfinite(self.mean):
            raise DataError("mean must be finite")


@dataclass(frozen=True)
class SimulationEnsemble:
    """``realizations[r, k]`` is realization r at target k."""

    realizations: np.ndarray
    seed: int
    mean: float
    kriged: np.ndarray
    kriging_variance: np.ndarray


def deform(spline: ThinPlateSpline | None, points) -> np.ndarray:
    """Images of ``points`` in the deformed space (identity when no spline)."""
    pts = as_points(points)
    if spline is None:
        return pts
    return np.asarray(tps_eval(spline, as_points(pts, spline.p)), dtype=float).reshape(len(pts), -1)


def _coincident(u_targets, u_data):
    """Index of the data image equal to each target image, or -1."""
    d = cdist(u_targets, u_data)
    hit = d <= 0.0
    idx = np.where(hit.any(axis=1), hit.argmax(axis=1), -1)
    return idx


def _check_distinct(u_data, tol=1e-12):
    if len(u_data) < 2:
        return
    d = pdist(u_data)
    scale = float(d.max())
    bad = np.flatnonzero(d <= tol * scale)
    if len(bad):
        n = len(u_data)
        iu = np.triu_indices(n, k=1)
        pairs = [(int(iu[0][b]), int(iu[1][b])) for b in bad[:5]]
        raise KrigingError(f"near-duplicate deformed data points (index pairs): {pairs}")


class OrdinaryKrigingSystem:
    """Ordinary kriging system on deformed data, factorized once.

    Written in covariance form ``[[C, 1], [1', 0]]``; the Lagrange value
    reported in results follows the variogram-form sign convention.
    """

    def __init__(self, u_data, values, model: MixtureVariogram, jitter: float = 1e-10):
        self.u = as_points(u_data)
        self.z = np.asarray(values, dtype=float)
        self.model = model
        n = len(self.z)
        _check_distinct(self.u)
        C = model.covariance(cdist(self.u, self.u))
        L = np.zeros((n + 1, n + 1))
        L[:n, :n] = C
        L[:n, n] = 1.0
        L[n, :n] = 1.0
        self.jitter = 0.0
        self._lu = self._factor(L)
        if self._lu is None:
            self.jitter = jitter * max(model.total_sill, 1.0)
            L[np.arange(n), np.arange(n)] += self.jitter
            self._lu = self._factor(L)
            if self._lu is None:
                raise KrigingError("ordinary kriging matrix is singular after jitter; "
                                   "deformed data points are nearly coincident")
        self.matrix = L

    @staticmethod
    def _factor(L):
        try:
            with np.errstate(all="ignore"):
                lu = spl.lu_factor(L, check_finite=True)
        except (spl.LinAlgError, ValueError):
            return None
        piv = np.abs(np.diag(lu[0]))
        if piv.min() <= 1e-14 * piv.max():
            return None
        return lu

    def solve(self, u_targets):
        """Weights (n, t), Lagrange (t,), estimates (t,), variances (t,)."""
        ut = as_points(u_targets, self.u.shape[1])
        n = len(self.z)
        c0 = self.model.covariance(cdist(self.u, ut))
        rhs = np.vstack([c0, np.ones((1, len(ut)))])
        sol = spl.lu_solve(self._lu, rhs)
        w, mu = sol[:n], sol[n]
        hit = _coincident(ut, self.u)
        exact = np.flatnonzero(hit >= 0)
        if len(exact):
            w[:, exact] = 0.0
            w[hit[exact], exact] = 1.0
            mu[exact] = 0.0
        est = w.T @ self.z
        var = self.model.total_sill - np.sum(w * c0, axis=0) - mu
        if len(exact):
            var[exact] = 0.0
        var = np.maximum(var, 0.0)
        return w, -mu, est, var

    def loo_predictions(self):
        """Leave-one-out predictions from the inverse of the bordered matrix."""
        n = len(self.z)
        inv = spl.lu_solve(self._lu, np.eye(n + 1))
        b = inv[:, :n] @ self.z
        resid = b[:n] / np.diag(inv)[:n]
        return self.z - resid


def ordinary_kriging(targets, data: Dataset, spline: ThinPlateSpline | None,
                     model: MixtureVariogram) -> list:
    """Ordinary kriging at geographic targets through the deformation."""
    system = OrdinaryKrigingSystem(deform(spline, data.coords), data.values, model)
    w, lag, est, var = system.solve(deform(spline, targets))
    return [KrigingResult(float(e), float(v), w[:, k].copy(), float(m))
            for k, (e, v, m) in enumerate(zip(est, var, lag))]


def krige_arrays(targets, data: Dataset, spline, model):
    """Estimates and variances as arrays; cheaper than ``ordinary_kriging``."""
    system = OrdinaryKrigingSystem(deform(spline, data.coords), data.values, model)
    _, _, est, var = system.solve(deform(spline, targets))
    return est, var


def simple_kriging_weights(u_data, u_targets, model: MixtureVariogram, jitter=1e-10):
    """Simple kriging weights (n, t) and variances (t,) for known mean."""
    u_data = as_points(u_data)
    ut = as_points(u_targets, u_data.shape[1])
    C = model.covariance(cdist(u_data, u_data))
    c0 = model.covariance(cdist(u_data, ut))
    factor = _cholesky(C, jitter)
    if factor is None:
        raise KrigingError("simple kriging covariance is not positive definite")
    w = spl.cho_solve(factor, c0)
    hit = _coincident(ut, u_data)
    exact = np.flatnonzero(hit >= 0)
    if len(exact):
        w[:, exact] = 0.0
        w[hit[exact], exact] = 1.0
    var = np.maximum(model.total_sill - np.sum(w * c0, axis=0), 0.0)
    if len(exact):
        var[exact] = 0.0
    return w, var


def _cholesky(C, start=1e-10, stop=1e-6):
    scale = max(float(np.max(np.diag(C))), 1e-300)
    try:
        return spl.cho_factor(C, lower=True)
    except spl.LinAlgError:
        pass
    jit = start
    while jit <= stop * (1 + 1e-9):
        try:
            return spl.cho_factor(C + jit * scale * np.eye(len(C)), lower=True)
        except spl.LinAlgError:
            jit *= 10
    return None


class GaussianSampler:
    """Dense factorization of the covariance at fixed locations."""

    def __init__(self, locations, model: MixtureVariogram, cap: int = DENSE_CAP):
        u = as_points(locations)
        if len(u) > cap:
            raise SimulationError(
                f"{len(u)} locations exceed the dense factorization cap of {cap}; "
                "use a smaller grid")
        C = model.covariance(cdist(u, u))
        factor = _cholesky(C)
        if factor is not None:
            self._root = np.tril(factor[0])
        else:
            vals, vecs = np.linalg.eigh(C)
            if vals.min() < -1e-6 * model.total_sill:
                raise SimulationError("covariance matrix is not positive semidefinite")
            self._root = vecs * np.sqrt(np.clip(vals, 0.0, None))
        self.size = len(u)

    def draw(self, rng, mean: float = 0.0, size: int | None = None) -> np.ndarray:
        if size is None:
            return mean + self._root @ rng.standard_normal(self.size)
        return mean + rng.standard_normal((size, self.size)) @ self._root.T


def unconditional_sim(locations, model: MixtureVariogram, mean: MeanModel | float = 0.0,
                      seed=None, size: int | None = None, cap: int = DENSE_CAP) -> np.ndarray:
    """Gaussian draw(s) with constant mean and covariance ``sill - gamma``.

    ``locations`` are deformed-space coordinates. Returns shape (N,) or
    (size, N).
    """
    m = mean.mean if isinstance(mean, MeanModel) else float(mean)
    sampler = GaussianSampler(locations, model, cap)
    return sampler.draw(np.random.default_rng(seed), m, size)


def conditional_sim(targets, data: Dataset, spline: ThinPlateSpline | None,
                    model: MixtureVariogram, mean: MeanModel | float | None = None,
                    n_real: int = 1, seed: int = 0, cap: int = DENSE_CAP) -> SimulationEnsemble:
    """Conditional Gaussian realizations by kriging the residual of a free draw.

    1. kriged data ``y* = m + w'(z - m)`` at each target image;
    2. joint unconditional draw over target and data images;
    3. kriged draw ``w* = m + w'(w_data - m)`` with the same weights;
    4. realization ``y* + w - w*``.
    Simple kriging weights with the constant mean are used in 1 and 3.
    """
    if n_real < 1:
        raise DataError("n_real must be at least 1")
    if mean is None:
        m = float(np.mean(data.values))
    else:
        m = mean.mean if isinstance(mean, MeanModel) else float(mean)
    u_d = deform(spline, data.coords)
    u_t = deform(spline, targets)
    _check_distinct(u_d)
    weights, sk_var = simple_kriging_weights(u_d, u_t, model)
    y_star = m + weights.T @ (data.values - m)

    union, inverse = np.unique(np.vstack([u_t, u_d]), axis=0, return_inverse=True)
    inverse = np.asarray(inverse).ravel()
    it, idd = inverse[:len(u_t)], inverse[len(u_t):]
    sampler = GaussianSampler(union, model, cap)

    out = np.empty((n_real, len(u_t)))
    for r in range(n_real):
        rng = np.random.default_rng([seed, r])
        w = sampler.draw(rng, m)
        w_star = m + weights.T @ (w[idd] - m)
        out[r] = y_star + w[it] - w_star
    return SimulationEnsemble(out, seed, m, y_star, sk_var)
