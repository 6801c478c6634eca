"""Thin-plate spline extension of the anchor deformation to the whole domain."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial.distance import cdist

from .spatial import AnchorSet, DataError, as_points


class SplineFitError(np.linalg.LinAlgError):
    pass


def sigma(h) -> float:
    """Radial basis ``|h|^2 log|h|``, zero at the origin."""
    r = float(np.linalg.norm(np.atleast_1d(np.asarray(h, float))))
    return r * r * np.log(r) if r > 0 else 0.0


def _radial(r):
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    pos = r > 0
    out[pos] = r[pos] ** 2 * np.log(r[pos])
    return out


@dataclass(frozen=True)
class ThinPlateSpline:
    """Map ``x -> offset + affine @ x + radial.T @ sigma(x - centers)``.

    Attributes
    ----------
    offset : ndarray, shape (q,)
    affine : ndarray, shape (q, p)
    radial : ndarray, shape (m, q)
    centers : ndarray, shape (m, p)
    ridge : float
        Diagonal regularization used in the fit (0 for an exact solve).
    """

    offset: np.ndarray
    affine: np.ndarray
    radial: np.ndarray
    centers: np.ndarray
    ridge: float = field(default=0.0)

    @property
    def p(self) -> int:
        return self.centers.shape[1]

    @property
    def q(self) -> int:
        return self.affine.shape[0]

    def __call__(self, x) -> np.ndarray:
        return tps_eval(self, x)

    @classmethod
    def identity(cls, centers) -> "ThinPlateSpline":
        c = as_points(centers)
        m, p = c.shape
        return cls(np.zeros(p), np.eye(p), np.zeros((m, p)), c)

    def side_condition_residual(self) -> float:
        return float(max(np.abs(self.radial.sum(axis=0)).max(),
                         np.abs(self.centers.T @ self.radial).max()))

    def to_text(self) -> str:
        m, p = self.centers.shape
        lines = [f"{p} {self.q} {m}"]
        fmt = lambda row: " ".join(repr(float(v)) for v in np.atleast_1d(row))
        lines.append(fmt(self.offset))
        lines.extend(fmt(r) for r in self.affine)
        lines.extend(fmt(r) for r in self.radial)
        lines.extend(fmt(r) for r in self.centers)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ThinPlateSpline":
        rows = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
        p, q, m = (int(v) for v in rows[0])
        vals = [np.array(r, dtype=float) for r in rows[1:]]
        if len(vals) != 1 + q + 2 * m:
            raise DataError("malformed spline file")
        offset = vals[0]
        affine = np.vstack(vals[1:1 + q]).reshape(q, p)
        radial = np.vstack(vals[1 + q:1 + q + m]).reshape(m, q)
        centers = np.vstack(vals[1 + q + m:]).reshape(m, p)
        return cls(offset, affine, radial, centers)

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path) -> "ThinPlateSpline":
        return cls.from_text(Path(path).read_text())


def tps_fit(X, U, cond_limit: float = 1e13) -> ThinPlateSpline:
    """Interpolating thin-plate spline with ``f(X) = U`` and side conditions."""
    centers = X.points if isinstance(X, AnchorSet) else as_points(X)
    m, p = centers.shape
    U = np.asarray(U, dtype=float)
    if U.ndim == 1:
        U = U[:, None]
    if len(U) != m:
        raise DataError(f"{m} centers but {len(U)} images")
    poly = np.hstack([np.ones((m, 1)), centers])
    if m < p + 2 or np.linalg.matrix_rank(poly) < p + 1:
        raise SplineFitError(
            "anchors are affinely degenerate (collinear in 2D or too few points); "
            "the spline system is singular"
        )
    K = _radial(cdist(centers, centers))
    L = np.zeros((m + p + 1, m + p + 1))
    L[:m, :m] = K
    L[:m, m:] = poly
    L[m:, :m] = poly.T
    rhs = np.zeros((m + p + 1, U.shape[1]))
    rhs[:m] = U

    ridge = 0.0
    try:
        sol = np.linalg.solve(L, rhs)
        ok = np.all(np.isfinite(sol)) and np.linalg.cond(L) < cond_limit
    except np.linalg.LinAlgError:
        ok = False
    if not ok:
        ridge = 1e-10
        L[:m, :m] += ridge * np.eye(m)
        try:
            sol = np.linalg.solve(L, rhs)
        except np.linalg.LinAlgError as exc:
            raise SplineFitError("spline system singular even with ridge; "
                                 "check for near-coincident anchors") from exc
    V = sol[:m]
    coef = sol[m:]
    return ThinPlateSpline(coef[0].copy(), coef[1:].T.copy(), V, centers.copy(), ridge)


def tps_eval(spline: ThinPlateSpline, x) -> np.ndarray:
    """Evaluate the spline at one location (returns shape (q,)) or at rows of x."""
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 0 or (arr.ndim == 1 and (spline.p > 1 or arr.size == 1))
    pts = as_points(arr.reshape(1, -1) if single else arr, spline.p)
    S = _radial(cdist(pts, spline.centers))
    out = spline.offset + pts @ spline.affine.T + S @ spline.radial
    return out[0] if single else out


def jacobian_determinants(spline: ThinPlateSpline, probes, step: float = 1e-6) -> np.ndarray:
    """Central finite-difference Jacobian determinant at each probe."""
    pts = as_points(probes, spline.p)
    p = spline.p
    J = np.empty((len(pts), spline.q, p))
    for k in range(p):
        e = np.zeros(p)
        e[k] = step
        J[:, :, k] = (tps_eval(spline, pts + e) - tps_eval(spline, pts - e)) / (2 * step)
    if p == 1 and spline.q == 1:
        return J[:, 0, 0]
    return np.linalg.det(J)


@dataclass(frozen=True)
class FoldReport:
    n_probes: int
    majority_sign: int
    fold_fraction: float
    min_det: float
    max_det: float

    @property
    def folded(self) -> bool:
        return self.fold_fraction > 0


def fold_check(spline: ThinPlateSpline, probe_grid) -> FoldReport:
    """Fraction of probes whose Jacobian sign differs from the majority sign."""
    det = jacobian_determinants(spline, probe_grid)
    signs = np.sign(det)
    majority = 1 if np.sum(signs > 0) >= np.sum(signs < 0) else -1
    frac = float(np.mean(signs != majority))
    return FoldReport(len(det), majority, frac, float(det.min()), float(det.max()))


def probe_grid(centers, per_axis: int = 50) -> np.ndarray:
    """Regular probes strictly inside the bounding box of the centers."""
    c = as_points(centers)
    lo, hi = c.min(axis=0), c.max(axis=0)
    pad = (hi - lo) * 1e-3
    axes = [np.linspace(a + e, b - e, per_axis) for a, b, e in zip(lo, hi, pad)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.column_stack([g.ravel() for g in mesh])
    if c.shape[1] == 2:
        from scipy.spatial import Delaunay

        inside = Delaunay(c).find_simplex(pts) >= 0
        pts = pts[inside]
    return pts
