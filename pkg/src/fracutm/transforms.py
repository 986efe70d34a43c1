r"""Half-Fourier transforms, time-kernel transforms and the quadrature engines.

.. math::

    \hat f(k) = \int_0^\infty e^{-ikx} f(x)\,dx, \qquad
    F(k,t) = \int_0^t e^{w(k)\tau} h(\tau)\,d\tau .
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional

import numpy as np
from scipy.special import wofz

from .errors import (DecayViolationError, NonFiniteIntegrandError, OverflowGuardError,
                     ToleranceNotMetError, ValidationError)
from .fraccalc import FunctionHandle, Order, rl_derivative, rl_integral
from .symbolgeo import Contour, FractionalSymbol, build_contour, principal_power

__all__ = [
    "QuadratureSpec", "adaptive_quad", "closed_form_hat", "half_fourier", "time_transform",
    "time_transform_damped", "BoundaryTransforms", "fractional_transform_identity_residual",
    "contour_integral", "OVERFLOW_EXP",
]

OVERFLOW_EXP = 700.0

# Gauss-Kronrod 7/15 pair
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_KX = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KW = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GW = np.zeros(15)
_GW[1:7:2] = _WG[:3]
_GW[7] = _WG[3]
_GW[13:7:-2] = _WG[:3]


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and truncations shared by the transform routines."""

    eps_rel: float = 1e-10
    eps_abs: float = 1e-13
    max_subdivisions: int = 4000
    x_max: Optional[float] = None
    k_max: float = 80.0

    def __post_init__(self):
        if not 0 < self.eps_rel <= 1e-2:
            raise ValidationError("eps_rel must lie in (0, 1e-2]", eps_rel=self.eps_rel)
        if not self.eps_abs > 0:
            raise ValidationError("eps_abs must be positive")


def adaptive_quad(f: Callable, a: float, b: float, eps_rel: float = 1e-10, eps_abs: float = 1e-13,
                  max_subdivisions: int = 4000, max_width: Optional[float] = None):
    """Globally adaptive Gauss--Kronrod (7/15) quadrature by interval halving.

    ``f`` maps an array of abscissae to an array of the same length, or to an
    array of shape ``(n, m)`` for m integrands sharing one partition. The error
    budget of an interval is proportional to its width; intervals over budget
    are halved until the summed estimate meets ``max(eps_abs, eps_rel*|I|)``.

    :returns: ``(value, error_estimate)``
    :raises ToleranceNotMetError: when the subdivision limit is reached.
    """
    a, b = float(a), float(b)
    if b <= a:
        return 0.0, 0.0
    n0 = 1 if not max_width else max(1, int(math.ceil((b - a) / max_width)))
    edges = np.linspace(a, b, n0 + 1)
    lo, hi = edges[:-1], edges[1:]
    done_val = 0.0
    done_err = 0.0
    total_len = b - a
    n_int = lo.size
    while True:
        c = 0.5 * (lo + hi)
        h = 0.5 * (hi - lo)
        x = (c[:, None] + h[:, None] * _KX[None, :]).ravel()
        fx = np.asarray(f(x))
        if not np.all(np.isfinite(fx)):
            bad = ~np.isfinite(fx)
            if bad.ndim > 1:
                bad = bad.any(axis=1)
            raise NonFiniteIntegrandError("non-finite integrand", x=float(x[bad][0]))
        fx = fx.reshape((lo.size, 15) + fx.shape[1:])
        kr = np.tensordot(_KW, fx, axes=(0, 1)) if fx.ndim > 2 else fx @ _KW
        gr = np.tensordot(_GW, fx, axes=(0, 1)) if fx.ndim > 2 else fx @ _GW
        kr = kr * (h if fx.ndim == 2 else h[:, None])
        gr = gr * (h if fx.ndim == 2 else h[:, None])
        err = np.abs(kr - gr)
        if err.ndim > 1:
            err = err.max(axis=1)
        total_val = done_val + kr.sum(axis=0)
        total_err = done_err + err.sum()
        tol = max(eps_abs, eps_rel * float(np.max(np.abs(total_val))))
        if total_err <= tol:
            return total_val, total_err
        budget = tol * (2 * h) / total_len
        split = err > 0.5 * budget
        if not np.any(split):
            split = err >= err.max()
        keep = ~split
        done_val = done_val + kr[keep].sum(axis=0)
        done_err = done_err + err[keep].sum()
        n_int += int(split.sum())
        if n_int > max_subdivisions:
            raise ToleranceNotMetError("adaptive quadrature subdivision limit reached",
                                       achieved=float(total_err), requested=float(tol))
        lo_s, hi_s, c_s = lo[split], hi[split], c[split]
        lo = np.concatenate([lo_s, c_s])
        hi = np.concatenate([c_s, hi_s])


# ---------------------------------------------------------------------------
# half-Fourier transform

def closed_form_hat(tag, k):
    """Analytic half-Fourier transform of a tagged family (None if no closed form)."""
    k = np.asarray(k, dtype=complex)
    kind = tag[0]
    if kind == "zero":
        return np.zeros_like(k)
    if kind == "exp_decay":
        _, lam, amp = tag
        return amp / (lam + 1j * k)
    if kind == "poly_exp":
        _, p, lam, amp = tag
        return amp * math.gamma(p + 1) / principal_power(lam + 1j * k, p + 1)
    if kind == "gaussian_x":
        _, lam, amp = tag
        sl = math.sqrt(lam)
        i0 = 0.5 * math.sqrt(math.pi / lam) * wofz(-k / (2 * sl))
        return amp * (1.0 / (2 * lam) - 1j * k / (2 * lam) * i0)
    if kind == "constant":
        return tag[1] / (1j * k)
    if kind == "lincomb":
        parts = [closed_form_hat(t, k) for _, t in tag[1]]
        if any(p is None for p in parts):
            return None
        return sum(c * p for (c, _), p in zip(tag[1], parts))
    return None


def _tail_cut(f: FunctionHandle, k, eps_abs):
    d = f.decay_rate - np.asarray(k, dtype=complex).imag
    d = float(np.min(d))
    return max(1.0, math.log(max(f.decay_amp / (eps_abs * d), 2.0)) / d)


def half_fourier(f: FunctionHandle, k, q: QuadratureSpec = QuadratureSpec(), *,
                 use_closed_form: bool = True):
    r""":math:`\int_0^\infty e^{-ikx} f(x)\,dx` for scalar or array k.

    Closed-form tags take an analytic fast path. Otherwise adaptive quadrature
    on :math:`[0, X_{max}]` with :math:`M e^{-(\delta-\operatorname{Im}k)X_{max}}/(\delta-\operatorname{Im}k)
    \le` ``eps_abs`` and interval widths at most :math:`\pi/(4|\operatorname{Re}k|)`.

    :raises DecayViolationError: if Im k >= decay rate of f.
    """
    kk = np.asarray(k, dtype=complex)
    if np.any(kk.imag >= f.decay_rate):
        raise DecayViolationError("Im(k) must be below the decay rate of f",
                                  decay_rate=f.decay_rate)
    if use_closed_form and f.tag is not None:
        out = closed_form_hat(f.tag, kk)
        if out is not None:
            return complex(out) if out.ndim == 0 else out
    flat = kk.ravel()
    X = q.x_max if q.x_max is not None else _tail_cut(f, flat, q.eps_abs)
    rk = float(np.max(np.abs(flat.real))) if flat.size else 0.0
    max_width = math.pi / (4 * rk) if rk > 0 else None

    def integrand(x):
        fx = f(x)
        return np.exp(-1j * np.outer(x, flat)) * np.asarray(fx)[:, None]

    val, _ = adaptive_quad(integrand, 0.0, X, q.eps_rel, q.eps_abs, q.max_subdivisions, max_width)
    val = np.asarray(val).reshape(kk.shape)
    return complex(val) if val.ndim == 0 else val


# ---------------------------------------------------------------------------
# time transforms

def _phi1(z):
    """(e^z - 1)/z with the z -> 0 limit."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-8
    zs = np.where(small, 1.0, z)
    return np.where(small, 1.0 + 0.5 * z, np.expm1(zs) / zs)


def time_transform(h: FunctionHandle, wk, t: float, q: QuadratureSpec = QuadratureSpec()):
    r""":math:`\int_0^t e^{w\tau} h(\tau)\,d\tau` (scalar or array ``wk``).

    :raises OverflowGuardError: if Re(w) t > 700.
    """
    w = np.asarray(wk, dtype=complex)
    t = float(t)
    if np.any(w.real * t > OVERFLOW_EXP):
        raise OverflowGuardError("Re(w) t exceeds 700", max=float(np.max(w.real) * t))
    out = time_transform_damped(h, w, t, q) * np.exp(w * t)
    return complex(out) if out.ndim == 0 else out


def time_transform_damped(h: FunctionHandle, wk, t: float, q: QuadratureSpec = QuadratureSpec()):
    r""":math:`e^{-wt}\int_0^t e^{w\tau}h(\tau)\,d\tau = \int_0^t e^{-w(t-\tau)}h(\tau)\,d\tau`,
    overflow-free for Re w >= 0 (used on the contour)."""
    w = np.asarray(wk, dtype=complex)
    t = float(t)
    if t == 0 or h.is_zero:
        return np.zeros_like(w) if w.ndim else 0j
    tag = h.tag
    if tag is not None and tag[0] == "constant":
        out = tag[1] * t * _phi1(-w * t)
    elif tag is not None and tag[0] == "exp_decay":
        _, lam, amp = tag
        out = amp * math.exp(-lam * t) * t * _phi1(-(w - lam) * t)
    else:
        flat = w.ravel()

        def integrand(tau):
            return np.exp(-np.outer(t - tau, flat)) * np.asarray(h(tau))[:, None]

        out, _ = adaptive_quad(integrand, 0.0, t, q.eps_rel, q.eps_abs, q.max_subdivisions)
        out = np.asarray(out).reshape(w.shape)
    return complex(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class BoundaryTransforms:
    r"""Time transforms :math:`F_\beta(k,t)=\int_0^t e^{w(k)\tau}D^\beta_x q(0,\tau)d\tau`
    for the orders :math:`\beta\in\{\alpha-1,\alpha-2\}` whose data is known.

    ``data`` maps the order label ``1`` (:math:`\alpha-1`) or ``2`` (:math:`\alpha-2`)
    to a :class:`FunctionHandle` in :math:`\tau`. F depends on k only through w(k),
    so it is invariant under any w-preserving map.
    """

    symbol: FractionalSymbol
    data: Dict[int, FunctionHandle]
    quadrature: QuadratureSpec = QuadratureSpec()

    def F(self, j: int, k, t: float):
        return time_transform(self.data[j], self.symbol(k), t, self.quadrature)

    def F_damped(self, j: int, k, t: float):
        return time_transform_damped(self.data[j], self.symbol(k), t, self.quadrature)

    def F_of_w(self, j: int, wk, t: float):
        return time_transform(self.data[j], wk, t, self.quadrature)


# ---------------------------------------------------------------------------
# identity check and contour integrals

def fractional_transform_identity_residual(f: FunctionHandle, alpha: float, k: complex,
                                           q: QuadratureSpec = QuadratureSpec(eps_rel=1e-8, eps_abs=1e-10),
                                           n: int = 2048) -> float:
    r"""Residual of the transformed fractional derivative

    .. math::

        \int_0^\infty e^{-ikx} D^\alpha f\,dx = (ik)^\alpha \hat f(k)
        - \sum_{j=0}^{m-1} (ik)^j D^{\alpha-j-1} f(0^+),

    both sides by independent quadrature (test oracle)."""
    k = complex(k)
    if not k.imag < 0:
        raise ValidationError("identity residual needs Im(k) < 0")
    m = Order(alpha).m
    delta = f.decay_rate - k.imag
    X = min(60.0, math.log(max(f.decay_amp, 1.0) / (q.eps_abs * delta)) / delta)

    # x = s^5 turns the x^(beta) endpoint behaviour of D^alpha f into a smooth one
    def integrand(s):
        x = s ** 5
        d = np.array([rl_derivative(f, alpha, xv, 0.0, n) if xv > 0 else 0.0 for xv in x])
        return np.exp(-1j * k * x) * d * 5 * s ** 4

    lhs, _ = adaptive_quad(integrand, 0.0, X ** 0.2, q.eps_rel, q.eps_abs,
                           q.max_subdivisions, 0.02)
    fhat = half_fourier(f, k, q, use_closed_form=False)
    x0 = 1e-10
    bsum = 0j
    for j in range(m):
        beta = alpha - j - 1
        if beta > 0:
            val = rl_derivative(f, beta, x0, 0.0, 64)
        elif beta == 0:
            val = complex(f(np.array([0.0]))[0])
        else:
            val = rl_integral(f, -beta, x0, 0.0, 64)
        bsum += (1j * k) ** j * val
    rhs = principal_power(1j * k, alpha) * fhat - bsum
    return float(abs(lhs - rhs))


def contour_integral(F: Callable, contour: Contour, *, estimate: bool = False):
    """Sum of weights times F over the contour nodes (orientation is in the weights).

    With ``estimate=True`` returns ``(value, error)`` where error is the change
    from the same rays at half the nodes per ray.
    """
    vals = np.asarray(F(contour.nodes), dtype=complex)
    if not np.all(np.isfinite(vals)):
        i = int(np.argmin(np.isfinite(vals)))
        raise NonFiniteIntegrandError("non-finite integrand on contour", node=complex(contour.nodes[i]))
    val = complex(np.dot(contour.weights, vals))
    if not estimate:
        return val
    half = contour.nodes_per_ray // 2
    if half < 16:
        return val, float("inf")
    coarse = build_contour(contour.rays, half - half % 16)
    cval = complex(np.dot(coarse.weights, np.asarray(F(coarse.nodes), dtype=complex)))
    return val, abs(val - cval)
