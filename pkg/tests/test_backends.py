import os
import subprocess
import sys

import numpy as np
import pytest

from nsdeform import _fallback, _kernels

core = pytest.importorskip("nsdeform._core")


def test_backend_selected():
    assert _kernels.BACKEND == "compiled"


def test_pure_python_switch():
    code = "import nsdeform; print(nsdeform.BACKEND)"
    env = dict(os.environ, NSDEFORM_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "python"


def test_pava_agrees(rng):
    for _ in range(50):
        n = int(rng.integers(1, 300))
        y, w = rng.normal(size=n), rng.uniform(0, 2, n)
        w[rng.uniform(size=n) < 0.1] = 0.0
        np.testing.assert_allclose(core.pava_sorted(y, w), _fallback.pava_sorted(y, w),
                                   rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("p", [1, 2])
def test_moments_agree(rng, p):
    coords = rng.uniform(size=(700, p))
    z = rng.normal(size=700)
    centers = rng.uniform(size=(40, p))
    for lam in (0.05, 0.3, 2.0):
        a = core.kernel_moments(centers, coords, z, lam)
        b = _fallback.kernel_moments(centers, coords, z, lam)
        for u, v in zip(a, b):
            np.testing.assert_allclose(u, v, rtol=1e-11, atol=1e-11)


@pytest.mark.parametrize("p", [1, 2])
def test_leave_two_out_agrees(rng, p):
    coords = rng.uniform(size=(150, p))
    z = rng.normal(size=150)
    for lam in (0.02, 0.2, 1.5):
        a = core.leave_two_out(coords, z, lam)
        b = _fallback.leave_two_out(coords, z, lam)
        assert a[0] == pytest.approx(b[0], rel=1e-10)
        assert a[1:] == b[1:]
