"""Hyper-parameter selection by two cross-validation criteria, and scoring."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from . import _kernels
from .pipeline import fit_deformation
from .prediction import OrdinaryKrigingSystem
from .spatial import AnchorSet, Dataset, DataError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class HyperParams:
    lam: float
    omega: float

    def __post_init__(self):
        if not self.lam > 0:
            raise DataError(f"bandwidth must be positive, got {self.lam}")
        if not 0.0 <= self.omega <= 1.0:
            raise DataError(f"omega must lie in [0, 1], got {self.omega}")


@dataclass
class CVScores:
    """Rows of (lambda, omega, score, status); omega is NaN for CV1."""

    stage: str
    rows: list = field(default_factory=list)

    def add(self, lam, omega, score, status="ok"):
        self.rows.append((float(lam), float(omega), float(score), status))

    def scores(self) -> np.ndarray:
        return np.array([r[2] for r in self.rows])

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["lambda", "omega", "score", "status"])
            for lam, om, sc, st in self.rows:
                writer.writerow([repr(lam), "" if math.isnan(om) else repr(om), repr(sc), st])


def cv1_score(data: Dataset, lam: float):
    """Leave-two-out variogram error for one bandwidth: ``(score, n_skipped)``."""
    if not lam > 0:
        raise DataError("bandwidth must be positive")
    z = np.ascontiguousarray(data.values - data.values.mean())
    total, _, skipped = _kernels.leave_two_out(
        np.ascontiguousarray(data.coords), z, float(lam))
    return total / data.n ** 2, int(skipped)


def cv1(data: Dataset, lambda_grid) -> CVScores:
    grid = list(lambda_grid)
    if not grid:
        raise DataError("lambda grid is empty")
    out = CVScores("CV1")
    for lam in grid:
        score, skipped = cv1_score(data, lam)
        out.add(lam, float("nan"), score, "ok" if skipped == 0 else f"partial:{skipped}")
    return out


def cv2(data: Dataset, hp: HyperParams, anchors: AnchorSet, **fit_kw):
    """Leave-one-out kriging error with the model fitted once on all data.

    Returns ``(score, status)``; the score is NaN when the fit fails or
    when the estimated deformation folds (it is then not a bijection, so
    the kriging model is not a valid deformation model).
    """
    try:
        fit = fit_deformation(data, anchors, hp.lam, hp.omega, check_folds=True, **fit_kw)
        if fit.fold.folded:
            return float("nan"), f"folded:{fit.fold.fold_fraction:.4g}"
        system = OrdinaryKrigingSystem(fit.deform(data.coords), data.values, fit.model)
        pred = system.loo_predictions()
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        log.info("cv2 failed at lambda=%g omega=%g: %s", hp.lam, hp.omega, exc)
        return float("nan"), f"undefined:{type(exc).__name__}"
    return float(np.mean((data.values - pred) ** 2)), "ok"


def cv2_table(data: Dataset, anchors: AnchorSet, lambdas, omegas, **fit_kw) -> CVScores:
    out = CVScores("CV2")
    for lam in lambdas:
        for om in omegas:
            score, status = cv2(data, HyperParams(lam, om), anchors, **fit_kw)
            out.add(lam, om, score, status)
    return out


def select(data: Dataset, anchors: AnchorSet, lambda_grid, omega_grid,
           shortlist_size: int = 3, **fit_kw):
    """Shortlist bandwidths by CV1, then minimize CV2 over shortlist x omegas.

    Returns ``(HyperParams, cv1_table, cv2_table)``. Ties go to the
    smallest bandwidth, then the smallest omega.
    """
    lams = sorted(set(float(v) for v in lambda_grid))
    oms = sorted(set(float(v) for v in omega_grid))
    if not lams or not oms:
        raise DataError("hyper-parameter grids must be non-empty")
    t1 = cv1(data, lams)
    s1 = t1.scores()
    order = np.lexsort((np.array(lams), s1))
    shortlist = sorted(lams[i] for i in order[:max(1, shortlist_size)])
    t2 = cv2_table(data, anchors, shortlist, oms, **fit_kw)
    valid = [r for r in t2.rows if np.isfinite(r[2])]
    if not valid:
        raise DataError("CV2 is undefined at every grid point")
    best = min(valid, key=lambda r: (r[2], r[0], r[1]))
    return HyperParams(best[0], best[1]), t1, t2


@dataclass(frozen=True)
class ScoreReport:
    mae: float
    rmse: float
    nmse: float
    logs: float
    crps: float

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("mae", "rmse", "nmse", "logs", "crps")}


def crps_gaussian(err, sd) -> np.ndarray:
    """Closed-form CRPS of a Gaussian predictive distribution.

    ``err`` is truth minus predictive mean. A zero ``sd`` gives |err|.
    """
    err, sd = np.broadcast_arrays(np.asarray(err, float), np.asarray(sd, float))
    shape = err.shape
    err, sd = err.ravel(), sd.ravel()
    out = np.abs(err)
    pos = sd > 0
    z = err[pos] / sd[pos]
    out[pos] = sd[pos] * (z * (2 * norm.cdf(z) - 1) + 2 * norm.pdf(z) - 1 / np.sqrt(np.pi))
    return out.reshape(shape)


def score(pred, sd, truth) -> ScoreReport:
    """MAE, RMSE, NMSE (target 1), summed log score and mean CRPS.

    Points predicted exactly with zero spread (data locations) are left
    out of NMSE and the log score.
    """
    pred = np.asarray(pred, float)
    sd = np.asarray(sd, float)
    truth = np.asarray(truth, float)
    if not (pred.shape == sd.shape == truth.shape):
        raise DataError("pred, sd and truth must have equal lengths")
    if np.any(sd < 0):
        raise DataError("standard deviations must be non-negative")
    e = truth - pred
    zero = sd == 0
    if np.any(zero & (e != 0)):
        raise DataError("zero predictive standard deviation with nonzero error")
    keep = ~zero
    nmse = float(np.mean((e[keep] / sd[keep]) ** 2)) if keep.any() else float("nan")
    logs = float(-np.sum(norm.logpdf(truth[keep], loc=pred[keep], scale=sd[keep])))
    return ScoreReport(
        mae=float(np.mean(np.abs(e))),
        rmse=float(np.sqrt(np.mean(e ** 2))),
        nmse=nmse,
        logs=logs,
        crps=float(np.mean(crps_gaussian(e, sd))),
    )
