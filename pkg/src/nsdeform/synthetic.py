"""Simulated non-stationary fields with known deformations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .prediction import DENSE_CAP, SimulationError, unconditional_sim
from .spatial import Dataset, DataError, as_points, regular_grid
from .variogram import BasicStructure, MixtureVariogram

CENTER = (0.5, 0.5)
REFERENCE_GRID_SIDE = 200


@dataclass(frozen=True)
class TrueDeformation:
    kind: str
    model: MixtureVariogram
    exponent: float = 4.0
    center: tuple = CENTER
    range_scale: float = 1.0

    def __call__(self, points) -> np.ndarray:
        pts = as_points(points)
        if self.kind == "power1d":
            return pts ** self.exponent
        if self.kind == "radial2d":
            o = np.asarray(self.center, float)
            r = np.linalg.norm(pts - o, axis=1, keepdims=True)
            return o + (pts - o) * r
        raise DataError(f"unknown deformation kind {self.kind!r}")


def gen_1d(n: int = 1000, seed: int = 0, exponent: float = 4.0, range_: float = 0.125):
    """Irregular 1D sample of a field deformed by ``x -> x**exponent``."""
    if n < 2:
        raise DataError("n must be at least 2")
    rng = np.random.default_rng([seed, 1])
    x = np.sort(rng.uniform(0.0, 1.0, n))
    model = MixtureVariogram((BasicStructure("exponential", 1.0, range_),))
    truth = TrueDeformation("power1d", model, exponent=exponent)
    z = unconditional_sim(truth(x), model, 0.0, seed=[seed, 2])
    return Dataset(x[:, None], z), truth


def desk_range_scale(grid_side: int) -> float:
    """Range inflation keeping the count of correlated grid neighbours."""
    return (REFERENCE_GRID_SIDE - 1) / (grid_side - 1)


def gen_2d(grid_side: int = 60, seed: int = 0, range_: float = 0.05,
           range_scale: float | None = None, cap: int = DENSE_CAP):
    """Regular grid on the unit square, radial deformation about (0.5, 0.5)."""
    if grid_side < 10:
        raise DataError("grid_side must be at least 10")
    if grid_side ** 2 > cap:
        raise SimulationError(
            f"a {grid_side}x{grid_side} grid exceeds the dense factorization cap "
            f"({cap} points); use grid_side <= {int(np.sqrt(cap))}")
    scale = desk_range_scale(grid_side) if range_scale is None else float(range_scale)
    pts = regular_grid([0, 0], [1, 1], [grid_side, grid_side])
    model = MixtureVariogram((BasicStructure("cubic", 1.0, range_ * scale),))
    truth = TrueDeformation("radial2d", model, range_scale=scale)
    z = unconditional_sim(truth(pts), model, 0.0, seed=[seed, 3], cap=cap)
    return Dataset(pts, z), truth


def split(data: Dataset, train_n: int, valid_n: int, seed: int = 0):
    """Disjoint random training and validation subsets."""
    if train_n < 2 or valid_n < 2 or train_n + valid_n > data.n:
        raise DataError(f"cannot split {data.n} samples into {train_n} + {valid_n}")
    perm = np.random.default_rng([seed, 4]).permutation(data.n)
    train = np.sort(perm[:train_n])
    valid = np.sort(perm[train_n:train_n + valid_n])
    return data.subset(train), data.subset(valid)
