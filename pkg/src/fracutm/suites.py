"""Invariant suites run by ``fracutm check``.

Each check returns a :class:`Check` with the measured value and its limit.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass
from typing import Callable, Dict, List

import numpy as np

from . import fraccalc as fc
from . import symbolgeo as sg
from . import transforms as tr
from . import utm

__all__ = ["Check", "SUITES", "run_suite"]


@dataclass
class Check:
    name: str
    value: float
    limit: float
    passed: bool
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag}  {self.name}: {self.value:.3e} (limit {self.limit:.1e}, {self.seconds:.1f}s)"


def _check(name, fn: Callable[[], float], limit, cmp="le") -> Check:
    t0 = time.perf_counter()
    v = float(fn())
    ok = v <= limit if cmp == "le" else v >= limit
    return Check(name, v, limit, bool(ok and math.isfinite(v)), time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# fraccalc

POWER_N = (0, 1, 2)
POWER_ALPHA = (0.3, 0.5, 1.5, 2.2)
POWER_X = (0.1, 0.25, 0.5, 1.0, 2.0)


def power_rule_error() -> float:
    err = 0.0
    for n in POWER_N:
        for a in POWER_ALPHA:
            for x in POWER_X:
                ref = fc.gamma_real(n + 1) * fc.reciprocal_gamma(n - a + 1) * x ** (n - a)
                got = fc.rl_derivative(lambda s: s ** n, a, x)
                err = max(err, abs(got - ref))
    return err


def gl_agreement() -> float:
    """Max |rl - gl| / max(1, |rl|) over the power-rule matrix; GL is Richardson-extrapolated."""
    err = 0.0
    for n in POWER_N:
        for a in POWER_ALPHA:
            for x in POWER_X:
                f = lambda s: s ** n
                rl = fc.rl_derivative(f, a, x)
                gl = 2 * fc.gl_derivative(f, a, x, N=8192) - fc.gl_derivative(f, a, x, N=4096)
                err = max(err, abs(rl - gl) / max(1.0, abs(rl)))
    return err


def semigroup_defect() -> float:
    fs = (lambda s: np.exp(-s), lambda s: s * np.exp(-s))
    h, L = 1e-3, 2.0
    grid = np.arange(int(round(L / h)) + 1) * h
    err = 0.0
    for f in fs:
        for a in (0.25, 0.5, 1.0):
            for b in (0.25, 0.5, 1.0):
                inner = fc.SampledFunction(grid, fc.rl_integral_grid(f(grid), h, b))
                for x in (0.5, 1.0, 2.0):
                    lhs = fc.rl_integral(inner, a, x)
                    rhs = fc.rl_integral(f, a + b, x)
                    err = max(err, abs(lhs - rhs))
    return err


def composition_defect() -> float:
    f = lambda s: np.exp(-s) + 1.0
    df = lambda s: -np.exp(-s)
    err = 0.0
    for a in (0.5, 1.5):
        for x in (0.5, 1.0, 2.0):
            r = (fc.rl_derivative(df, a, x) - fc.rl_derivative(f, a + 1, x)
                 + x ** (-a - 1) * fc.reciprocal_gamma(-a) * f(0.0))
            err = max(err, abs(r))
    return err


def _differintegral(g, order, x):
    if order < 0:
        return fc.rl_integral(g, -order, x)
    if order == 0:
        return complex(g(x))
    return fc.rl_derivative(g, order, x)


def integration_by_parts_residual() -> float:
    r"""Residual of :math:`\int_a^b f D^\alpha_{a+}g = \int_a^b g\,{}^CD^\alpha_{b-}f
    + \sum_{j<n}(-1)^j[f^{(j)} D^{\alpha-1-j}_{a+}g]_a^b` with a = 0, b = 3.

    The terms at a vanish because the differintegrals of g of order below 1 are 0 there.
    Both integrals use u^2 substitutions towards their weakly singular endpoint.
    """
    f = lambda s: np.exp(-s)
    derivs = [lambda s: np.exp(-s), lambda s: -np.exp(-s), lambda s: np.exp(-s)]
    g = lambda s: s * np.exp(-s)
    b = 3.0
    u, wu = np.polynomial.legendre.leggauss(48)
    u = 0.5 * math.sqrt(b) * (u + 1)
    wu = 0.5 * math.sqrt(b) * wu
    err = 0.0
    for a in (0.5, 1.5):
        n = math.ceil(a)
        lhs = sum(w * 2 * uu * f(uu * uu) * fc.rl_derivative(g, a, uu * uu) for uu, w in zip(u, wu))
        rhs = sum(w * 2 * uu * g(b - uu * uu) * fc.right_rl_differintegral(f, a, b - uu * uu, b, "caputo")
                  for uu, w in zip(u, wu))
        bnd = sum((-1) ** j * derivs[j](b) * _differintegral(g, a - 1 - j, b) for j in range(n))
        err = max(err, abs(lhs - rhs - bnd))
    return err


def exponential_rule_error() -> float:
    return abs(fc.rl_derivative(np.exp, 0.5, 0.0, a=-40.0, n=8192) - 1.0)


def gamma_error() -> float:
    xs = np.linspace(-19.95, 50, 1403)
    xs = xs[np.abs(xs - np.round(xs)) > 1e-6]
    ref = np.array([math.gamma(v) for v in xs])
    return float(np.max(np.abs(fc.gamma_real(xs) / ref - 1)))


def fraccalc_suite() -> List[Check]:
    return [
        _check("gamma relative error on [-20, 50]", gamma_error, 1e-12),
        _check("power rule max error", power_rule_error, 1e-4),
        _check("semigroup defect", semigroup_defect, 1e-4),
        _check("composition defect", composition_defect, 1e-3),
        _check("integration by parts residual", integration_by_parts_residual, 1e-3),
        _check("RL vs Grunwald-Letnikov", gl_agreement, 1e-3),
        _check("exponential rule", exponential_rule_error, 1e-3),
    ]


# ---------------------------------------------------------------------------
# geometry

def _uhp_samples(n=10_000, seed=0):
    rng = np.random.default_rng(seed)
    r = rng.uniform(0.1, 10.0, n)
    th = rng.uniform(0.0, math.pi, n)
    return r * np.exp(1j * th)


def region_disagreements(alphas=(1.6, 2.0, 2.2, 2.4)) -> int:
    k = _uhp_samples()
    bad = 0
    for a in alphas:
        w = sg.FractionalSymbol.monomial_symbol(1.0, a)
        bad += int(np.sum(sg.dplus_indicator(w, k) != sg.dplus_sectors(a).contains(k)))
    return bad


def emptiness_violations(alphas=(1.1, 1.3, 1.5)) -> int:
    k = _uhp_samples(seed=1)
    bad = 0
    for a in alphas:
        w = sg.FractionalSymbol.monomial_symbol(1.0, a)
        bad += int(np.sum(sg.dplus_indicator(w, k))) + int(not sg.dplus_sectors(a).empty)
    return bad


ADMISSIBILITY = {0.5: False, 1.0: True, 1.2: True, 2.0: True, 3.0: True, 3.5: False, 5.5: True}


def admissibility_mismatches() -> int:
    return sum(sg.monomial_admissible(a) != v for a, v in ADMISSIBILITY.items())


def nu_preservation(alphas=(2.0, 2.2), n=100) -> float:
    rng = np.random.default_rng(2)
    err = 0.0
    for a in alphas:
        w = sg.FractionalSymbol.monomial_symbol(1.0, a)
        for m in sg.ray_nu_maps(a):
            k = []
            while len(k) < n:
                z = rng.uniform(0.1, 10) * np.exp(1j * rng.uniform(-math.pi, math.pi))
                if m.valid_at(z):
                    k.append(z)
            k = np.array(k)
            err = max(err, float(np.max(np.abs(w(m(k)) - w(k)) / np.abs(w(k)))))
    return err


def nu_window_mismatches() -> int:
    bad = 0
    for a in np.linspace(1.4, 2.5, 52)[1:-1]:
        th1, th2 = sg.exact_gamma_angles(a)
        rot = np.array([th1, th2]) - 2 * math.pi / a
        inside = bool(np.all((rot > -math.pi) & (rot < 0)))
        bad += inside != bool(sg.nu_candidates(a))
    return bad


def branch_consistency() -> float:
    rng = np.random.default_rng(3)
    err = 0.0
    for a in rng.uniform(0.05, 2.95, 40):
        lim = min(math.pi, math.pi / a) * 0.999
        th = rng.uniform(-lim, lim, 50)
        k = rng.uniform(0.1, 10, 50) * np.exp(1j * th)
        p = sg.principal_power(k, a)
        err = max(err, float(np.max(np.abs(np.angle(p) - a * th))),
                  float(np.max(np.abs(np.abs(p) / np.abs(k) ** a - 1))))
    return err


def geometry_suite() -> List[Check]:
    return [
        _check("D+ sector vs indicator disagreements", region_disagreements, 0),
        _check("D+ emptiness violations (alpha <= 3/2)", emptiness_violations, 0),
        _check("admissibility table mismatches", admissibility_mismatches, 0),
        _check("nu-map w-preservation (relative)", nu_preservation, 1e-12),
        _check("nu window mismatches", nu_window_mismatches, 0),
        _check("principal branch consistency", branch_consistency, 1e-12),
    ]


# ---------------------------------------------------------------------------
# transforms

def closed_form_vs_quadrature() -> float:
    ks = np.array([-1j, 0.5 - 0.5j, -2 - 0.1j, 3.0 - 1e-3j])
    err = 0.0
    for f in (fc.exp_decay(1.0), fc.poly_exp(2, 1.5), fc.gaussian_x(1.0)):
        a = tr.half_fourier(f, ks)
        b = tr.half_fourier(f, ks, use_closed_form=False)
        err = max(err, float(np.max(np.abs(a - b) / np.maximum(1, np.abs(a)))))
    return err


def continuation_error() -> float:
    f = fc.from_callable(lambda x: np.exp(-x), 1.0, 1.0)
    ks = np.array([0.3 + 0.5j, -1 + 0.2j, 2 + 0.8j])
    return float(np.max(np.abs(tr.half_fourier(f, ks) - 1 / (1 + 1j * ks))))


def gaussian_contour_error() -> float:
    """e^{-k^2} on the alpha=2 V contour closed against the real axis.

    On the exact rays (angles pi/4, 3pi/4) the integrand is a pure Fresnel
    oscillation; the rays rotated by 0.1 towards the real axis give decay.
    """
    c = sg.gamma_contour(2.0, r_max=12.0, eps_rot=0.1, nodes_per_ray=256)
    val = tr.contour_integral(lambda k: np.exp(-k * k), c)
    return abs(val - math.sqrt(math.pi))


def time_transform_error() -> float:
    from scipy.integrate import quad
    h = fc.exp_decay(2.0)
    err = 0.0
    for wk in (-1.0 + 0.5j, 0.3 - 2j, 4.0):
        got = tr.time_transform(h, wk, 0.7)
        re = quad(lambda s: (np.exp(wk * s) * np.exp(-2 * s)).real, 0, 0.7, epsabs=1e-14)[0]
        im = quad(lambda s: (np.exp(wk * s) * np.exp(-2 * s)).imag, 0, 0.7, epsabs=1e-14)[0]
        err = max(err, abs(got - (re + 1j * im)))
    return err


def transforms_suite() -> List[Check]:
    return [
        _check("half-Fourier closed form vs quadrature", closed_form_vs_quadrature, 1e-9),
        _check("half-Fourier continuation (Im k > 0)", continuation_error, 1e-8),
        _check("Gaussian contour deformation", gaussian_contour_error, 1e-8),
        _check("time transform vs scipy quad", time_transform_error, 1e-10),
    ]


# ---------------------------------------------------------------------------
# utm

ACC_X = np.array([0.25, 0.5, 1.0, 2.0])
ACC_T = np.array([0.1, 0.25, 0.5])


def heat_spec(**kw) -> utm.ProblemSpec:
    return utm.ProblemSpec(1.0, 2.0, 0.5, fc.gaussian_x(1.0), **kw)


def fractional_spec(**kw) -> utm.ProblemSpec:
    return utm.ProblemSpec(1.0, 2.2, 0.5, fc.gaussian_x(1.0), **kw)


def heat_error() -> float:
    q, _ = utm.solve(heat_spec()).grid(ACC_X, ACC_T)
    ref = np.array([utm.heat_oracle(1.0, 1.0, ACC_X, t) for t in ACC_T])
    return float(np.max(np.abs(q - ref)))


def gr_max(seed=0) -> float:
    sp = fractional_spec()
    rng = np.random.default_rng(seed)
    ks = rng.uniform(-2, 2, 20) - 1j * rng.uniform(0.1, 2, 20)
    return utm.gr_report(sp, utm.solve(sp), ks, [0.125, 0.25]).max


def pde_rel() -> float:
    sp = fractional_spec()
    return utm.pde_residual(utm.solve(sp), sp).relative


def initial_recovery() -> float:
    x = np.array([0.5, 1.0, 2.0])
    err = 0.0
    for make in (heat_spec, fractional_spec):
        q, _ = utm.solve(make()).evaluate(x, 1e-3)
        err = max(err, float(np.max(np.abs(q - x * np.exp(-x * x)))))
    return err


def deformation_ratio() -> float:
    """max |q_a - q_b| / (3 max(err_a, err_b)) over eps_rot pairs; <= 1 passes."""
    worst = 0.0
    for make in (heat_spec, fractional_spec):
        res = [utm.solve(make(contour=utm.ContourParams(eps_rot=e))).grid(ACC_X, ACC_T)
               for e in (0.03, 0.05, 0.08)]
        for i in range(3):
            for j in range(i + 1, 3):
                d = np.abs(res[i][0] - res[j][0])
                tol = 3 * np.maximum(res[i][1], res[j][1])
                worst = max(worst, float(np.max(d / tol)))
    return worst


def linearity_defect() -> float:
    f, g = fc.gaussian_x(1.0), fc.poly_exp(2, 1.5)
    s = fc.lincomb((1.0, f), (0.5, g))
    x = np.array([0.25, 1.0, 2.0])
    make = lambda q0: utm.solve(utm.ProblemSpec(1.0, 2.2, 0.5, q0)).evaluate(x, 0.25)[0]
    a, b, c = make(f), make(g), make(s)
    return float(np.max(np.abs(c - (a + 0.5 * b)) / (1e-8 + 1e-6 * np.abs(c))))


def scaling_defect() -> float:
    """v(x, t) = u(lam x, lam^alpha t) for v solved with q0(lam x); ratio to 1e-8 + 1e-6|v|."""
    worst = 0.0
    x = np.array([0.25, 0.5, 1.0])
    for a in (2.0, 2.2):
        u = utm.solve(utm.ProblemSpec(1.0, a, 4.0, fc.gaussian_x(1.0)))
        for lam in (0.5, 2.0):
            # q0(lam x) = lam x e^{-lam^2 x^2}
            v = utm.solve(utm.ProblemSpec(1.0, a, 0.5, fc.gaussian_x(lam * lam, lam)))
            qv, ev = v.evaluate(x, 0.25)
            qu, eu = u.evaluate(lam * x, lam ** a * 0.25)
            worst = max(worst, float(np.max(np.abs(qv - qu) / (1e-8 + 1e-6 * np.abs(qv) + ev + eu))))
    return worst


def boundary_recovery() -> float:
    """max |q(1e-2, t) - oracle| for alpha = 2 at t in {0.1, 0.25}."""
    f = utm.solve(heat_spec())
    return max(abs(f(0.01, t) - utm.heat_oracle(1.0, 1.0, 0.01, t)) for t in (0.1, 0.25))


def utm_suite() -> List[Check]:
    return [
        _check("alpha=2 heat oracle max error", heat_error, 1e-3),
        _check("alpha=2.2 GR residual max (relative)", gr_max, 1e-3),
        _check("alpha=2.2 PDE residual (relative)", pde_rel, 5e-2),
        _check("initial recovery at t=1e-3", initial_recovery, 5e-3),
        _check("eps_rot independence (ratio to 3x estimate)", deformation_ratio, 1.0),
        _check("linearity (ratio to 1e-8 + 1e-6|q|)", linearity_defect, 1.0),
        _check("scaling covariance (ratio to tolerance)", scaling_defect, 1.0),
        _check("boundary recovery error at x=1e-2", boundary_recovery, 5e-3),
    ]


SUITES: Dict[str, Callable[[], List[Check]]] = {
    "fraccalc": fraccalc_suite,
    "geometry": geometry_suite,
    "transforms": transforms_suite,
    "utm": utm_suite,
}


def run_suite(name: str) -> List[Check]:
    names = list(SUITES) if name == "all" else [name]
    out = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for n in names:
            out.extend(SUITES[n]())
    return out
