"""Pure-Python/numpy versions of the compiled kernels in ``_core.pyx``.

Signatures and return values match the compiled module exactly; the test
suite runs both and checks agreement.
"""

import numpy as np
from scipy.spatial.distance import cdist

_CHUNK = 512


def pava_sorted(y, w):
    y = np.asarray(y, dtype=float)
    w = np.asarray(w, dtype=float)
    vals, wts, sizes = [], [], []
    for yi, wi in zip(y.tolist(), w.tolist()):
        vals.append(yi)
        wts.append(wi)
        sizes.append(1)
        while len(vals) > 1 and vals[-2] > vals[-1]:
            wsum = wts[-2] + wts[-1]
            if wsum > 0:
                v = (wts[-2] * vals[-2] + wts[-1] * vals[-1]) / wsum
            else:
                v = 0.5 * (vals[-2] + vals[-1])
            size = sizes[-2] + sizes[-1]
            del vals[-1], wts[-1], sizes[-1]
            vals[-1], wts[-1], sizes[-1] = v, wsum, size
    return np.repeat(np.array(vals), sizes)


def _epan_matrix(a, b, lam):
    d2 = cdist(a, b, "sqeuclidean")
    return np.where(d2 <= lam * lam, 1.0 - d2 / (lam * lam), 0.0)


def kernel_moments(centers, coords, z, lam):
    centers = np.asarray(centers, dtype=float)
    coords = np.asarray(coords, dtype=float)
    z = np.asarray(z, dtype=float)
    zz = np.column_stack([np.ones_like(z), z, z * z])
    out = np.empty((len(centers), 3))
    for start in range(0, len(centers), _CHUNK):
        stop = start + _CHUNK
        out[start:stop] = _epan_matrix(centers[start:stop], coords, lam) @ zz
    return out[:, 0].copy(), out[:, 1].copy(), out[:, 2].copy()


def leave_two_out(coords, z, lam):
    coords = np.asarray(coords, dtype=float)
    z = np.asarray(z, dtype=float)
    n = len(z)
    a, s1, s2 = kernel_moments(coords, coords, z, lam)
    total, used, skipped = 0.0, 0, 0
    for start in range(0, n, _CHUNK):
        rows = np.arange(start, min(start + _CHUNK, n))
        k = _epan_matrix(coords[rows], coords, lam)
        zi = z[rows][:, None]
        zj = z[None, :]
        ai = a[rows][:, None] - 1.0 - k
        bi = s1[rows][:, None] - zi - k * zj
        ci = s2[rows][:, None] - zi * zi - k * zj * zj
        aj = a[None, :] - 1.0 - k
        bj = s1[None, :] - zj - k * zi
        cj = s2[None, :] - zj * zj - k * zi * zi
        offdiag = rows[:, None] != np.arange(n)[None, :]
        ok = offdiag & (ai > 1e-12) & (aj > 1e-12)
        with np.errstate(divide="ignore", invalid="ignore"):
            est = (ci * aj + ai * cj - 2.0 * bi * bj) / (2.0 * ai * aj)
        est = np.maximum(est, 0.0)
        star = 0.5 * (zi - zj) ** 2
        total += float(np.sum(((est - star) ** 2)[ok]))
        used += int(ok.sum())
        skipped += int((offdiag & ~ok).sum())
    return total, used, skipped
