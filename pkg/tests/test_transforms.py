import math

import numpy as np
import pytest
from scipy.integrate import quad

from fracutm import fraccalc as fc
from fracutm import symbolgeo as sg
from fracutm import transforms as tr
from fracutm.errors import (DecayViolationError, NonFiniteIntegrandError, OverflowGuardError,
                            ValidationError)

KS = np.array([0.0, 1.5, -2.0, 0.3 - 0.5j, -1 - 1j, 4 - 0.2j])


def _quad_hat(fn, k, X=40.0):
    re = quad(lambda x: (np.exp(-1j * k * x) * fn(x)).real, 0, X, limit=400)[0]
    im = quad(lambda x: (np.exp(-1j * k * x) * fn(x)).imag, 0, X, limit=400)[0]
    return re + 1j * im


def test_half_fourier_examples():
    f = fc.exp_decay(1.0)
    assert tr.half_fourier(f, 0.0) == pytest.approx(1.0, abs=1e-15)
    assert tr.half_fourier(f, -0.5j) == pytest.approx(2 / 3, abs=1e-15)
    assert tr.half_fourier(fc.gaussian_x(1.0), 0.0) == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("f", [fc.exp_decay(1.3, 2.0), fc.poly_exp(1.5, 0.8), fc.gaussian_x(1.0),
                               fc.gaussian_x(2.5, -0.5)], ids=["exp", "poly", "gauss1", "gauss2"])
def test_closed_forms_match_quadrature(f):
    closed = tr.half_fourier(f, KS)
    adapt = tr.half_fourier(f, KS, use_closed_form=False)
    np.testing.assert_allclose(adapt, closed, rtol=0, atol=1e-9)
    for k, c in zip(KS, closed):
        assert abs(_quad_hat(f, k) - c) <= 1e-8


def test_analytic_continuation_above_real_axis():
    f = fc.exp_decay(1.0)
    k = np.array([0.5j, 2 + 0.9j, -1 + 0.3j])
    np.testing.assert_allclose(tr.half_fourier(f, k, use_closed_form=False), 1 / (1 + 1j * k),
                               atol=1e-8)


def test_decay_violation():
    with pytest.raises(DecayViolationError):
        tr.half_fourier(fc.exp_decay(1.0), 1.5j)


def test_half_fourier_linearity():
    rng = np.random.default_rng(5)
    f, g = fc.exp_decay(1.0), fc.poly_exp(1.0, 2.0)
    for _ in range(3):
        a, b = rng.normal(size=2)
        h = fc.from_callable(lambda x, a=a, b=b: a * f(x) + b * g(x), 1.0, abs(a) + abs(b))
        lhs = tr.half_fourier(h, KS)
        rhs = a * tr.half_fourier(f, KS, use_closed_form=False) \
            + b * tr.half_fourier(g, KS, use_closed_form=False)
        assert np.max(np.abs(lhs - rhs)) <= 1e-10 * (1 + np.max(np.abs(rhs)))


def test_time_transform_examples():
    one = fc.constant(1.0)
    assert tr.time_transform(one, 0.0, 2.0) == pytest.approx(2.0, abs=1e-15)
    assert tr.time_transform(one, -1.0, 1.0) == pytest.approx(1 - math.exp(-1), abs=1e-15)
    assert tr.time_transform(fc.zero(), 3 - 2j, 0.7) == 0
    with pytest.raises(OverflowGuardError):
        tr.time_transform(one, 800.0, 1.0)


@pytest.mark.parametrize("h", [fc.constant(2.0), fc.exp_decay(0.7, 1.5), fc.poly_exp(1.0, 1.0)],
                         ids=["const", "exp", "poly"])
def test_time_transform_vs_quad(h):
    for wk in (-1.0, 0.3 + 2j, -4 - 7j, 1e-10):
        t = 0.8
        re = quad(lambda s: (np.exp(wk * s) * h(np.array([s]))[0]).real, 0, t)[0]
        im = quad(lambda s: (np.exp(wk * s) * h(np.array([s]))[0]).imag, 0, t)[0]
        assert tr.time_transform(h, wk, t) == pytest.approx(re + 1j * im, abs=1e-11)


def test_time_transform_linearity():
    f, g = fc.constant(1.0), fc.exp_decay(2.0)
    h = fc.from_callable(lambda x: 0.3 * f(x) - 1.7 * g(x), 1e-6, 2.0)
    wk = np.array([-1 + 1j, 0.5, -3j])
    lhs = tr.time_transform(h, wk, 0.6)
    rhs = 0.3 * tr.time_transform(f, wk, 0.6) - 1.7 * tr.time_transform(g, wk, 0.6)
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * np.max(np.abs(rhs))


def test_boundary_transforms_nu_invariance():
    alpha = 2.2
    w = sg.FractionalSymbol.monomial_symbol(1.0, alpha)
    bt = tr.BoundaryTransforms(w, {2: fc.exp_decay(1.0)})
    k = 0.7 * np.exp(1j * 0.4)
    nu = sg.ray_nu_maps(alpha)[1]
    assert abs(bt.F(2, nu(k), 0.5) - bt.F(2, k, 0.5)) <= 1e-12


def test_quadrature_spec_validation():
    with pytest.raises(ValidationError):
        tr.QuadratureSpec(eps_rel=0.5)


def test_adaptive_quad_and_nonfinite():
    val, err = tr.adaptive_quad(np.sin, 0, math.pi)
    assert val == pytest.approx(2.0, abs=1e-12) and err < 1e-10
    with pytest.raises(NonFiniteIntegrandError):
        tr.adaptive_quad(lambda x: np.where(x > 0.5, np.inf, 1.0), 0, 1)


def test_contour_integral_gaussian():
    c = sg.gamma_contour(2.0, r_max=12, eps_rot=0.1, nodes_per_ray=256)
    assert tr.contour_integral(lambda k: 0 * k, c) == 0
    val, est = tr.contour_integral(lambda k: np.exp(-k * k), c, estimate=True)
    assert abs(val - math.sqrt(math.pi)) <= 1e-8
    errs = []
    for n in (32, 64, 128):
        cn = sg.gamma_contour(2.0, r_max=12, eps_rot=0.1, nodes_per_ray=n)
        errs.append(abs(tr.contour_integral(lambda k: np.exp(-k * k), cn) - math.sqrt(math.pi)))
    for a, b in zip(errs, errs[1:]):
        assert b <= a / 4 or b <= 1e-13


def test_contour_integral_inverse_square():
    rays = (sg.Ray(2.5, 0.5, 3.0, -1), sg.Ray(0.6, 0.5, 3.0, +1))
    c = sg.build_contour(rays, 64)
    val = tr.contour_integral(lambda k: 1 / k ** 2, c)
    e1, e2 = 3.0 * np.exp(2.5j), 0.5 * np.exp(2.5j)
    e3, e4 = 0.5 * np.exp(0.6j), 3.0 * np.exp(0.6j)
    exact = (1 / e1 - 1 / e2) + (1 / e3 - 1 / e4)
    assert abs(val - exact) <= 1e-10


def test_identity_residual_integer_order():
    f = fc.poly_exp(2.0, 1.0)
    assert tr.fractional_transform_identity_residual(f, 1.0, -1j, n=256) <= 1e-6


def test_identity_residual_fractional():
    f = fc.poly_exp(2.0, 1.0)
    assert tr.fractional_transform_identity_residual(f, 0.5, -0.5 - 0.5j, n=512) <= 1e-3


def test_identity_residual_three_boundary_terms():
    f = fc.poly_exp(2.0, 1.0)
    assert tr.fractional_transform_identity_residual(f, 2.2, -1j, n=512) <= 1e-3
