import os
import subprocess
import sys

import numpy as np
import pytest

from fracutm import _fallback, kernels


@pytest.fixture
def data():
    rng = np.random.default_rng(7)
    x = np.sort(rng.uniform(0, 20, 50))
    k = rng.uniform(0, 30, 300) * np.exp(1j * rng.uniform(0.2, 2.9, 300))
    c = rng.standard_normal(300) + 1j * rng.standard_normal(300)
    return x, k, c


def test_exp_sum_reference(data):
    x, k, c = data
    ref = np.exp(1j * np.outer(x, k)) @ c
    np.testing.assert_allclose(_fallback.exp_sum(x, k, c), ref, rtol=1e-13, atol=1e-13)
    np.testing.assert_allclose(_fallback.exp_sum_abs(x, k, c),
                               np.abs(np.exp(1j * np.outer(x, k))) @ np.abs(c), rtol=1e-13)


def test_backends_agree(data):
    x, k, c = data
    for name in ("exp_sum", "exp_sum_abs"):
        a = getattr(kernels, name)(x, k, c)
        b = getattr(_fallback, name)(x, k, c)
        np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-13 * np.max(np.abs(b)))
    rng = np.random.default_rng(8)
    bb, v = rng.standard_normal(500), rng.standard_normal(500) + 1j * rng.standard_normal(500)
    ref = np.array([np.dot(bb[:i + 1][::-1], v[:i + 1]) for i in range(500)])
    np.testing.assert_allclose(kernels.causal_toeplitz(bb, v), ref, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(_fallback.causal_toeplitz(bb, v), ref, rtol=1e-12, atol=1e-12)


def test_pure_switch():
    env = dict(os.environ, FRACUTM_PURE="1")
    out = subprocess.run([sys.executable, "-c", "import fracutm; print(fracutm.BACKEND)"],
                         capture_output=True, text=True, env=env)
    assert out.stdout.strip() == "python"
    assert kernels.BACKEND in ("python", "cython")
