r"""Principal powers, the dispersion symbol, the region :math:`D^+`, the contour
:math:`\Gamma` and the rotation maps :math:`\nu`.

Monomial normalisation: :math:`w(k) = -A (ik)^\alpha` with the principal branch.
For :math:`3/2 < \alpha < 5/2` the region :math:`D^+=\{\operatorname{Im}k>0,\ \operatorname{Re}w<0\}`
is the sector between the rays

.. math::

    \theta_2 = \frac{(3-\alpha)\pi}{2\alpha}, \qquad \theta_1 = \frac{(3\alpha-3)\pi}{2\alpha}.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import (BranchCutError, DomainError, GeometryError, NoValidNuError,
                     UnsupportedRangeError, ValidationError)

__all__ = [
    "principal_power", "FractionalSymbol", "symbol_eval", "Admissibility",
    "check_real_axis_admissible", "monomial_admissible", "SectorRegion", "dplus_sectors",
    "dplus_indicator", "exact_gamma_angles", "Ray", "Contour", "gamma_contour",
    "radial_rule", "NuMap", "nu_candidates", "ray_nu_maps", "NU_WINDOW",
]

NU_WINDOW = (7.0 / 5.0, 7.0 / 3.0)
_PANEL = 16
_GEO_LEVELS = 12


def principal_power(k, alpha: float, *, upper_limit: bool = False):
    r""":math:`k^\alpha = r^\alpha e^{i\alpha\theta}`, :math:`\theta\in(-\pi,\pi)`.

    Accepts scalars or arrays. ``upper_limit=True`` evaluates points of the
    negative real axis as limits from above (:math:`\theta=\pi`).

    :raises BranchCutError: for k on :math:`(-\infty, 0)` (unless ``upper_limit``).
    :raises DomainError: for k = 0 with alpha <= 0.
    """
    kk = np.asarray(k, dtype=complex)
    r = np.abs(kk)
    th = np.arctan2(kk.imag, kk.real)
    on_cut = (kk.imag == 0) & (kk.real < 0)
    if np.any(on_cut):
        if not upper_limit:
            raise BranchCutError("k on the branch cut (-inf, 0]",
                                 k=complex(kk[on_cut].ravel()[0]))
        th = np.where(on_cut, np.pi, th)
    zero = r == 0
    if np.any(zero) and alpha <= 0:
        raise DomainError("0 to a non-positive power")
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(zero, 0j, r ** alpha * np.exp(1j * alpha * th))
    return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class FractionalSymbol:
    r"""Dispersion symbol :math:`w(k)=\sum c_j k^{\alpha_j}`, or the monomial
    :math:`-A(ik)^\alpha` when ``monomial`` is set (then ``terms == ((A, alpha),)``)."""

    terms: Tuple[Tuple[complex, float], ...]
    monomial: bool = False

    def __post_init__(self):
        if not self.terms:
            raise ValidationError("symbol needs at least one term")
        for c, a in self.terms:
            if not a > 0:
                raise ValidationError("symbol exponents must be positive", exponent=a)
        if self.monomial:
            if len(self.terms) != 1 or not (np.isreal(self.terms[0][0]) and self.terms[0][0].real > 0):
                raise ValidationError("monomial symbol needs a single term with A > 0")

    @classmethod
    def monomial_symbol(cls, A: float, alpha: float) -> "FractionalSymbol":
        return cls(((float(A), float(alpha)),), monomial=True)

    @property
    def A(self) -> float:
        return float(np.real(self.terms[0][0]))

    @property
    def alpha(self) -> float:
        return float(self.terms[0][1])

    def __call__(self, k, *, upper_limit: bool = False):
        return symbol_eval(self, k, upper_limit=upper_limit)


def symbol_eval(w: FractionalSymbol, k, *, upper_limit: bool = False):
    """Evaluate w at k (scalar or array), termwise on the principal branch."""
    if w.monomial:
        A, a = w.terms[0]
        try:
            return -A * principal_power(1j * np.asarray(k, dtype=complex), a,
                                        upper_limit=upper_limit)
        except BranchCutError as e:
            raise BranchCutError("ik on the branch cut of (ik)^alpha", term=(A, a), **e.info)
    out = 0j
    for c, a in w.terms:
        try:
            out = out + c * principal_power(k, a, upper_limit=upper_limit)
        except BranchCutError as e:
            raise BranchCutError("k on the branch cut", term=(c, a), **e.info)
    return out


@dataclass(frozen=True)
class Admissibility:
    admissible: bool
    k_star: Optional[float] = None
    value: Optional[complex] = None


def check_real_axis_admissible(w: FractionalSymbol, samples: int = 400) -> Admissibility:
    """Sample Re w(k) >= 0 on a symmetric log grid over |k| in [1e-3, 1e3]."""
    if samples < 100:
        raise ValidationError("samples must be >= 100")
    half = np.geomspace(1e-3, 1e3, (samples + 1) // 2)
    ks = np.concatenate([-half[::-1], half])
    vals = np.asarray(symbol_eval(w, ks + 0j, upper_limit=True))
    bad = vals.real < -1e-12 * (1 + np.abs(vals))
    if np.any(bad):
        i = int(np.argmax(bad))
        return Admissibility(False, float(ks[i]), complex(vals[i]))
    return Admissibility(True)


def monomial_admissible(alpha: float) -> bool:
    r"""True iff :math:`\alpha \in [1,3]\cup[5,7]\cup\dots` (Re w >= 0 on the real line)."""
    if not alpha > 0:
        raise ValidationError("alpha must be positive")
    r = math.fmod(alpha, 4.0)
    return 1.0 <= r <= 3.0


@dataclass(frozen=True)
class SectorRegion:
    """Union of open sectors ``theta_lo < arg k < theta_hi`` in the upper half plane."""

    sectors: Tuple[Tuple[float, float], ...] = ()

    def __post_init__(self):
        prev = -np.inf
        for lo, hi in self.sectors:
            if not (0 <= lo < hi <= math.pi) or lo < prev:
                raise ValidationError("sectors must be sorted, disjoint and nonempty")
            prev = hi

    @property
    def empty(self) -> bool:
        return not self.sectors

    def contains(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=complex)
        th = np.angle(k)
        inside = np.zeros(k.shape, dtype=bool)
        for lo, hi in self.sectors:
            inside |= (th > lo) & (th < hi)
        return inside & (k.imag > 0)


def exact_gamma_angles(alpha: float) -> Tuple[float, float]:
    r"""Exact ray angles :math:`(\theta_1, \theta_2)` of :math:`\Gamma = \partial D^+`."""
    return ((3 * alpha - 3) * math.pi / (2 * alpha), (3 - alpha) * math.pi / (2 * alpha))


def dplus_sectors(alpha: float) -> SectorRegion:
    """Closed-form D+ for the monomial symbol, alpha in (1, 5/2)."""
    if not 1.0 < alpha < 2.5:
        raise UnsupportedRangeError("alpha outside (1, 5/2)", alpha=alpha)
    if alpha <= 1.5:
        return SectorRegion(())
    th1, th2 = exact_gamma_angles(alpha)
    return SectorRegion(((th2, th1),))


def dplus_indicator(w: FractionalSymbol, k) -> np.ndarray | bool:
    """Membership of D+ = {Im k > 0, Re w(k) < 0}; vectorised over k.

    Points where a power's base hits its cut (e.g. k on the positive imaginary axis
    for the monomial) use the limit from above; Re w agrees on both sides there.
    """
    kk = np.asarray(k, dtype=complex)
    val = np.asarray(symbol_eval(w, kk, upper_limit=True))
    out = (kk.imag > 0) & (val.real < 0)
    return bool(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# contour

def _gl(n):
    return np.polynomial.legendre.leggauss(n)


def radial_rule(r_max: float, nodes: int, refine: int = _GEO_LEVELS, r_min: float = 0.0):
    """Composite Gauss--Legendre rule on (r_min, r_max].

    ``nodes`` points in uniform 16-point panels, with the first panel replaced by
    ``refine`` geometrically shrinking panels (branch point at k = 0 and fast
    decay scales at large x).
    """
    if nodes < _PANEL or nodes % _PANEL:
        raise ValidationError("nodes_per_ray must be a positive multiple of 16", nodes=nodes)
    npan = nodes // _PANEL
    edges = np.linspace(r_min, r_max, npan + 1)
    first = edges[1]
    geo = r_min + (first - r_min) * 2.0 ** -np.arange(refine, -1, -1, dtype=float)
    edges = np.concatenate([[r_min], geo, edges[2:]])
    t, wt = _gl(_PANEL)
    a, b = edges[:-1], edges[1:]
    r = (0.5 * (b - a)[:, None] * t[None, :] + 0.5 * (b + a)[:, None]).ravel()
    w = (0.5 * (b - a)[:, None] * wt[None, :]).ravel()
    return r, w


@dataclass(frozen=True)
class Ray:
    """Ray ``k = r e^{i angle}``, r in (r_min, r_max]; ``direction`` +1 outward, -1 inward."""

    angle: float
    r_min: float
    r_max: float
    direction: int


@dataclass(frozen=True)
class Contour:
    r"""Oriented union of rays with quadrature.

    ``weights`` already contain :math:`e^{i\theta}` and the orientation sign, so
    :math:`\int_C F\,dk \approx \sum_j w_j F(k_j)`.
    """

    rays: Tuple[Ray, ...]
    nodes: np.ndarray
    weights: np.ndarray
    ray_index: np.ndarray
    nodes_per_ray: int

    @property
    def angles(self) -> Tuple[float, ...]:
        return tuple(r.angle for r in self.rays)


def build_contour(rays: Sequence[Ray], nodes_per_ray: int, refine: int = _GEO_LEVELS) -> Contour:
    ks, ws, idx = [], [], []
    for i, ray in enumerate(rays):
        r, w = radial_rule(ray.r_max, nodes_per_ray, refine, ray.r_min)
        e = np.exp(1j * ray.angle)
        ks.append(r * e)
        ws.append(ray.direction * w * e)
        idx.append(np.full(r.size, i))
    return Contour(tuple(rays), np.concatenate(ks), np.concatenate(ws),
                   np.concatenate(idx), nodes_per_ray)


def gamma_contour(alpha: float, r_max: float = 200.0, eps_rot: float = 0.05,
                  nodes_per_ray: int = 256, A: float = 1.0) -> Contour:
    r"""The V-contour :math:`\Gamma` rotated by ``eps_rot`` away from :math:`D^+`.

    Descending ray (angle :math:`\theta_1+\epsilon`, traversed :math:`\infty\to0`)
    then ascending ray (angle :math:`\theta_2-\epsilon`, :math:`0\to\infty`).
    """
    if not 1.5 < alpha < 2.5:
        raise UnsupportedRangeError("gamma_contour needs alpha in (3/2, 5/2)", alpha=alpha)
    if not r_max > 0:
        raise GeometryError("r_max must be positive")
    th1, th2 = exact_gamma_angles(alpha)
    gap = th2  # angle between the ascending ray and the real axis (mirror for th1)
    if not 0 <= eps_rot < 0.5 * gap:
        raise GeometryError("eps_rot must lie in [0, gap/2)", eps_rot=eps_rot, gap=gap)
    rays = (Ray(th1 + eps_rot, 0.0, r_max, -1), Ray(th2 - eps_rot, 0.0, r_max, +1))
    c = build_contour(rays, nodes_per_ray)
    w = FractionalSymbol.monomial_symbol(A, alpha)
    vals = np.asarray(symbol_eval(w, c.nodes))
    tol = 0.0 if eps_rot > 0 else 1e-12
    if np.any(c.nodes.imag <= 0) or np.any(vals.real <= -tol * np.abs(vals)):
        raise GeometryError("contour nodes left {Im k > 0, Re w >= 0}")
    return c


# ---------------------------------------------------------------------------
# nu maps

@dataclass(frozen=True)
class NuMap:
    r"""Rotation :math:`\nu(k) = e^{2\pi i n/\alpha} k`."""

    n: int
    alpha: float
    window: Optional[Tuple[float, float]] = None

    @property
    def factor(self) -> complex:
        return complex(np.exp(2j * math.pi * self.n / self.alpha))

    def __call__(self, k):
        return self.factor * np.asarray(k, dtype=complex)

    def valid_at(self, k) -> np.ndarray:
        r"""Points where rotation commutes with the principal power of ik:
        :math:`\arg(ik)` and :math:`\arg(ik)+2\pi n/\alpha` both in :math:`(-\pi,\pi)`."""
        th = np.angle(1j * np.asarray(k, dtype=complex))
        s = th + 2 * math.pi * self.n / self.alpha
        return (s > -math.pi) & (s < math.pi)


def _rotated_exact_angles(alpha: float, n: int = -1) -> Tuple[float, float]:
    th1, th2 = exact_gamma_angles(alpha)
    d = 2 * math.pi * n / alpha
    return th1 + d, th2 + d


def nu_candidates(alpha: float) -> List[NuMap]:
    r"""The uniform rotation :math:`e^{-2\pi i/\alpha}` if it maps both exact rays of
    :math:`\Gamma` into :math:`\arg\in(-\pi,0)`; geometrically this is
    :math:`\alpha\in(7/5, 7/3)`."""
    if not 1.0 < alpha < 2.5:
        raise UnsupportedRangeError("nu_candidates needs alpha in (1, 5/2)", alpha=alpha)
    a1, a2 = _rotated_exact_angles(alpha)
    if -math.pi < a1 < 0 and -math.pi < a2 < 0:
        return [NuMap(-1, alpha, NU_WINDOW)]
    return []


def ray_nu_maps(alpha: float) -> Tuple[NuMap, NuMap]:
    r"""w-preserving maps used for elimination, per ray of :math:`\Gamma`.

    On the descending ray (Re k < 0) :math:`\nu_L(k)=e^{+2\pi i/\alpha}k`; on the
    ascending ray (Re k > 0) :math:`\nu_R(k)=e^{-2\pi i/\alpha}k`. Both send their
    ray into the lower half plane for every alpha > 1. The uniform map of
    :func:`nu_candidates` agrees with :math:`\nu_R` but changes w by the factor
    :math:`e^{2\pi i\alpha}` on the descending ray.
    """
    if not alpha > 1:
        raise NoValidNuError("alpha must exceed 1", alpha=alpha)
    return NuMap(+1, alpha), NuMap(-1, alpha)

