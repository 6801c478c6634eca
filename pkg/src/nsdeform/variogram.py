"""Isotropic variogram structures, the experimental variogram in the deformed
space, automatic mixture fitting, and the composed non-stationary variogram."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import nnls
from scipy.spatial.distance import pdist

from .spatial import DataError, as_points
from .tps import ThinPlateSpline, tps_eval

KINDS = ("nugget", "exponential", "spherical", "gaussian", "cubic")


def _unit_structure(kind: str, h: np.ndarray, a: float) -> np.ndarray:
    if kind == "nugget":
        return (h > 0).astype(float)
    r = h / a
    if kind == "exponential":
        return 1.0 - np.exp(-r)
    if kind == "gaussian":
        return 1.0 - np.exp(-r * r)
    rc = np.minimum(r, 1.0)
    if kind == "spherical":
        return 1.5 * rc - 0.5 * rc ** 3
    if kind == "cubic":
        return 7 * rc ** 2 - 8.75 * rc ** 3 + 3.5 * rc ** 5 - 0.75 * rc ** 7
    raise DataError(f"unknown structure kind {kind!r}")


@dataclass(frozen=True)
class BasicStructure:
    kind: str
    sill: float = 1.0
    range: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DataError(f"unknown structure kind {self.kind!r}; expected one of {KINDS}")
        if not self.sill > 0:
            raise DataError(f"sill must be positive, got {self.sill}")
        if self.kind == "nugget":
            object.__setattr__(self, "range", None)
        elif self.range is None or not self.range > 0:
            raise DataError(f"{self.kind} structure needs a positive range")

    def __call__(self, h):
        h = np.asarray(h, dtype=float)
        return self.sill * _unit_structure(self.kind, h, self.range)

    def with_sill(self, sill: float) -> "BasicStructure":
        return BasicStructure(self.kind, sill, self.range)


@dataclass(frozen=True)
class MixtureVariogram:
    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise DataError("a mixture needs at least one component")
        object.__setattr__(self, "components", comps)

    def __call__(self, h):
        h = np.asarray(h, dtype=float)
        return sum(c(h) for c in self.components)

    @property
    def total_sill(self) -> float:
        return float(sum(c.sill for c in self.components))

    @property
    def nugget(self) -> float:
        return float(sum(c.sill for c in self.components if c.kind == "nugget"))

    @property
    def max_range(self) -> float:
        ranges = [c.range for c in self.components if c.range is not None]
        return max(ranges) if ranges else 0.0

    def covariance(self, h):
        """Covariance ``total_sill - gamma(h)`` of the bounded model."""
        return self.total_sill - self(h)

    def rescaled(self, factor: float) -> "MixtureVariogram":
        """Same model with every range multiplied by ``factor``."""
        return MixtureVariogram(tuple(
            c if c.range is None else BasicStructure(c.kind, c.sill, c.range * factor)
            for c in self.components
        ))

    def to_text(self) -> str:
        return "".join(
            f"{c.kind} {c.sill!r} {0.0 if c.range is None else float(c.range)!r}\n"
            for c in self.components
        )

    @classmethod
    def from_text(cls, text: str) -> "MixtureVariogram":
        comps = []
        for line in text.strip().splitlines():
            if not line.strip():
                continue
            kind, sill, rng = line.split()
            comps.append(BasicStructure(kind, float(sill), None if kind == "nugget" else float(rng)))
        return cls(tuple(comps))

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path) -> "MixtureVariogram":
        return cls.from_text(Path(path).read_text())


def gamma0_eval(model: MixtureVariogram, h) -> float:
    h = float(h)
    if h < 0:
        raise DataError(f"lag must be non-negative, got {h}")
    return float(model(h))


@dataclass(frozen=True)
class ExperimentalVariogram:
    """Binned half mean squared increments.

    ``lags`` are bin midpoints, ``mean_distance`` the average pair
    distance inside each bin (NaN when empty).
    """

    lags: np.ndarray
    values: np.ndarray
    counts: np.ndarray
    mean_distance: np.ndarray
    bin_width: float

    @property
    def occupied(self) -> np.ndarray:
        return self.counts > 0

    def rows(self):
        return zip(self.lags, self.mean_distance, self.values, self.counts)


def experimental_variogram(points, values, n_lags: int = 15,
                           max_dist: float | None = None) -> ExperimentalVariogram:
    """Equal-width lag classes on (0, max_dist] over all point pairs.

    ``max_dist`` defaults to half the largest pairwise distance.
    """
    pts = as_points(points)
    z = np.asarray(values, dtype=float).ravel()
    if len(z) != len(pts):
        raise DataError("points and values lengths differ")
    if n_lags < 2:
        raise DataError("n_lags must be at least 2")
    d = pdist(pts)
    iu = np.triu_indices(len(z), k=1)
    sq = 0.5 * (z[iu[0]] - z[iu[1]]) ** 2
    if max_dist is None:
        max_dist = 0.5 * float(d.max())
    if not max_dist > 0:
        raise DataError("max_dist must be positive")
    width = max_dist / n_lags
    keep = (d > 0) & (d <= max_dist)
    if not np.any(keep):
        raise DataError(f"no pair of points within max_dist={max_dist}")
    idx = np.minimum(np.ceil(d[keep] / width).astype(int) - 1, n_lags - 1)
    idx = np.maximum(idx, 0)
    counts = np.bincount(idx, minlength=n_lags)
    sums = np.bincount(idx, weights=sq[keep], minlength=n_lags)
    dsum = np.bincount(idx, weights=d[keep], minlength=n_lags)
    with np.errstate(invalid="ignore", divide="ignore"):
        vals = np.where(counts > 0, sums / np.maximum(counts, 1), 0.0)
        mean_d = np.where(counts > 0, dsum / np.maximum(counts, 1), np.nan)
    lags = (np.arange(n_lags) + 0.5) * width
    return ExperimentalVariogram(lags, vals, counts, mean_d, width)


def default_dictionary(max_dist: float, min_dist: float | None = None, n_ranges: int = 12,
                       kinds=("exponential", "spherical", "cubic")) -> list:
    """Nugget plus each bounded kind on a geometric range grid."""
    lo = min_dist if min_dist is not None else max_dist / 30.0
    ranges = np.geomspace(lo, 2.0 * max_dist, n_ranges)
    out = [BasicStructure("nugget")]
    out.extend(BasicStructure(k, 1.0, float(a)) for k in kinds for a in ranges)
    return out


def _design(ev: ExperimentalVariogram, shapes):
    h = np.where(ev.occupied, ev.mean_distance, ev.lags)[ev.occupied]
    cols = np.column_stack([BasicStructure(s.kind, 1.0, s.range)(h) for s in shapes])
    w = ev.counts[ev.occupied] / h ** 2
    return cols, ev.values[ev.occupied], np.sqrt(w)


def fit_mixture(ev: ExperimentalVariogram, dictionary=None,
                prune_ratio: float = 1e-3) -> MixtureVariogram:
    """Non-negative weighted least squares over a dictionary of unit structures.

    Lags are weighted by pair count over squared lag. Components whose
    sill falls below ``prune_ratio`` times the total are dropped and the
    survivors refitted.
    """
    if np.count_nonzero(ev.occupied) < 2:
        raise DataError("need at least two occupied lags to fit a model")
    if not np.any(ev.values[ev.occupied] > 0):
        raise DataError("experimental variogram is identically zero: no spatial structure")
    if dictionary is None:
        dictionary = default_dictionary(float(ev.lags[-1] + 0.5 * ev.bin_width), ev.bin_width)
    shapes = list(dictionary)
    cols, y, sw = _design(ev, shapes)
    coef, _ = nnls(cols * sw[:, None], y * sw)
    for _ in range(len(shapes)):
        total = coef.sum()
        keep = coef > prune_ratio * total
        if keep.all():
            break
        shapes = [s for s, k in zip(shapes, keep) if k]
        coef, _ = nnls(cols[:, keep] * sw[:, None], y * sw)
        cols = cols[:, keep]
    comps = [s.with_sill(float(c)) for s, c in zip(shapes, coef) if c > 0]
    return MixtureVariogram(tuple(comps))


def mixture_residual(ev: ExperimentalVariogram, model: MixtureVariogram) -> float:
    h = np.where(ev.occupied, ev.mean_distance, ev.lags)[ev.occupied]
    return float(np.max(np.abs(model(h) - ev.values[ev.occupied])))


def gamma_ns(x, y, spline: ThinPlateSpline, model: MixtureVariogram) -> float:
    """Non-stationary variogram between two geographic locations."""
    fx = np.atleast_1d(tps_eval(spline, x))
    fy = np.atleast_1d(tps_eval(spline, y))
    return float(model(float(np.linalg.norm(fx - fy))))


def gamma_ns_matrix(points, spline: ThinPlateSpline, model: MixtureVariogram) -> np.ndarray:
    from scipy.spatial.distance import cdist

    u = tps_eval(spline, as_points(points, spline.p))
    return model(cdist(u, u))
