"""Independent reference solutions used by the test-suite (mpmath based)."""
from __future__ import annotations

import math
from functools import lru_cache

import mpmath as mp
import numpy as np


def gaussian_x_hat_mp(k, lam=1.0):
    r""":math:`\int_0^\infty e^{-ikx} x e^{-\lambda x^2}dx` in multiprecision."""
    k = mp.mpc(k)
    z = k / (2 * mp.sqrt(lam))
    i0 = mp.sqrt(mp.pi) / (2 * mp.sqrt(lam)) * mp.exp(-z ** 2) * mp.erfc(1j * z)
    return (1 - 1j * k * i0) / (2 * lam)


@lru_cache(maxsize=None)
def dirichlet_trace(alpha: float, A: float, tau: float, lam: float = 1.0) -> float:
    r""":math:`D^{\alpha-1}q(0,\tau)` for zero Dirichlet data and :math:`q_0=xe^{-\lambda x^2}`.

    Laplace in time, :math:`\tilde u(s) = \hat q_0(\kappa(s))/A` with
    :math:`\kappa(s) = -i(s/A)^{1/\alpha}` (the root of w(k) = s with Im k < 0),
    inverted by Talbot's method.
    """
    mp.mp.dps = 30
    F = lambda s: gaussian_x_hat_mp(-1j * mp.exp(mp.log(s / A) / alpha), lam) / A
    return float(mp.re(mp.invertlaplace(F, tau, method="talbot")))


def dirichlet_qhat(alpha: float, A: float, k: complex, t: float, lam: float = 1.0,
                   n_panels: int = 8, order: int = 12) -> complex:
    r""":math:`\hat q(k,t)` from the global relation with the Laplace-inverted trace."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.concatenate([[0.0], t * np.geomspace(1e-6, 1.0, n_panels)])
    W = complex(-A * np.exp(alpha * np.log(1j * k)))
    U = 0j
    for a, b in zip(edges[:-1], edges[1:]):
        for xi, wi in zip(x, w):
            tau = 0.5 * (b - a) * xi + 0.5 * (a + b)
            U += 0.5 * (b - a) * wi * np.exp(W * tau) * dirichlet_trace(alpha, A, float(tau), lam)
    return complex(np.exp(-W * t) * (complex(gaussian_x_hat_mp(k, lam)) - A * U))


def heat_dirichlet_unit(x, t, A=1.0):
    """Heat equation on x > 0, q(0,t) = 1, q(x,0) = 0."""
    from scipy.special import erfc
    return erfc(np.asarray(x) / (2 * np.sqrt(A * t)))


def heat_neumann_unit(x, t, A=1.0):
    """Heat equation on x > 0, q_x(0,t) = 1, q(x,0) = 0."""
    from scipy.special import erfc
    x = np.asarray(x, dtype=float)
    s = A * t
    return -(2 * np.sqrt(s / math.pi) * np.exp(-x * x / (4 * s)) - x * erfc(x / (2 * np.sqrt(s))))
