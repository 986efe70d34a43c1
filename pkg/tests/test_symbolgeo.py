import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracutm import symbolgeo as sg
from fracutm.errors import (BranchCutError, DomainError, GeometryError, UnsupportedRangeError,
                            ValidationError)


def test_principal_power_examples():
    assert sg.principal_power(1j, 2) == pytest.approx(-1, abs=1e-15)
    for a in (0.3, 1.7, 2.2):
        assert sg.principal_power(1.0, a) == pytest.approx(1.0, abs=1e-15)
    k = 2 * cmath.exp(1j * math.pi / 3)
    assert sg.principal_power(k, 1.5) == pytest.approx(2.8284271247461903j, abs=1e-14)
    assert sg.principal_power(0.0, 1.5) == 0


def test_principal_power_errors():
    with pytest.raises(BranchCutError):
        sg.principal_power(-2.0, 0.5)
    with pytest.raises(DomainError):
        sg.principal_power(0.0, 0.0)
    assert sg.principal_power(-1.0, 0.5, upper_limit=True) == pytest.approx(1j, abs=1e-15)


def test_symbol_eval_examples():
    w2 = sg.FractionalSymbol.monomial_symbol(1.0, 2.0)
    assert w2(1.0) == pytest.approx(1.0, abs=1e-15)
    w22 = sg.FractionalSymbol.monomial_symbol(1.0, 2.2)
    assert w22(1.0) == pytest.approx(-cmath.exp(1.1j * math.pi), abs=1e-14)
    multi = sg.FractionalSymbol(((1.0, 1.0), (1.0, 2.0)))
    assert multi(1j) == pytest.approx(-1 + 1j, abs=1e-15)
    with pytest.raises(BranchCutError):
        multi(-1.0)
    with pytest.raises(ValidationError):
        sg.FractionalSymbol(((1.0, -1.0),))


def test_admissibility():
    table = {0.5: False, 1: True, 1.2: True, 2: True, 3: True, 3.5: False, 5.5: True}
    for a, expect in table.items():
        assert sg.monomial_admissible(a) is expect
    assert sg.check_real_axis_admissible(sg.FractionalSymbol.monomial_symbol(1, 2)).admissible
    assert sg.check_real_axis_admissible(sg.FractionalSymbol.monomial_symbol(1, 2.2)).admissible
    bad = sg.check_real_axis_admissible(sg.FractionalSymbol.monomial_symbol(1, 3.5))
    assert not bad.admissible and bad.k_star is not None
    with pytest.raises(ValidationError):
        sg.check_real_axis_admissible(sg.FractionalSymbol.monomial_symbol(1, 2), samples=10)


def test_dplus_sectors():
    lo, hi = sg.dplus_sectors(2.0).sectors[0]
    assert (lo, hi) == pytest.approx((math.pi / 4, 3 * math.pi / 4), abs=1e-15)
    lo, hi = sg.dplus_sectors(2.2).sectors[0]
    assert (lo, hi) == pytest.approx((0.5712, 2.5704), abs=1e-4)
    assert sg.dplus_sectors(1.4).empty
    with pytest.raises(UnsupportedRangeError):
        sg.dplus_sectors(2.6)


def test_dplus_indicator_examples():
    w2 = sg.FractionalSymbol.monomial_symbol(1, 2)
    assert sg.dplus_indicator(w2, 1j) is True
    assert sg.dplus_indicator(w2, 1.0) is False
    w22 = sg.FractionalSymbol.monomial_symbol(1, 2.2)
    assert sg.dplus_indicator(w22, cmath.exp(1j * math.pi / 8)) is False


@pytest.mark.parametrize("alpha", [1.6, 2.0, 2.2, 2.4])
def test_region_agreement(alpha):
    rng = np.random.default_rng(1)
    k = rng.uniform(0.1, 10, 10_000) * np.exp(1j * rng.uniform(1e-9, math.pi - 1e-9, 10_000))
    w = sg.FractionalSymbol.monomial_symbol(1, alpha)
    assert np.array_equal(sg.dplus_indicator(w, k), sg.dplus_sectors(alpha).contains(k))


@pytest.mark.parametrize("alpha", [1.1, 1.3, 1.5])
def test_region_empty(alpha):
    rng = np.random.default_rng(2)
    k = rng.uniform(0.1, 10, 10_000) * np.exp(1j * rng.uniform(1e-9, math.pi - 1e-9, 10_000))
    assert not np.any(sg.dplus_indicator(sg.FractionalSymbol.monomial_symbol(1, alpha), k))


def test_gamma_contour_angles_and_nodes():
    c = sg.gamma_contour(2.0, eps_rot=0.0, r_max=10)
    assert c.angles == pytest.approx((3 * math.pi / 4, math.pi / 4), abs=1e-15)
    c = sg.gamma_contour(2.2, eps_rot=0.0, r_max=10)
    assert c.angles == pytest.approx((2.5704, 0.5712), abs=1e-4)
    c = sg.gamma_contour(2.0, eps_rot=0.1, r_max=10, nodes_per_ray=64)
    w = np.asarray(sg.symbol_eval(sg.FractionalSymbol.monomial_symbol(1, 2), c.nodes))
    assert np.all(w.real > 0) and np.all(c.nodes.imag > 0)
    assert c.nodes.size == 2 * (64 + 12 * 16)


def test_gamma_contour_errors():
    with pytest.raises(GeometryError):
        sg.gamma_contour(2.0, eps_rot=1.0)
    with pytest.raises(GeometryError):
        sg.gamma_contour(2.0, r_max=-1)
    with pytest.raises(UnsupportedRangeError):
        sg.gamma_contour(1.4)
    with pytest.raises(ValidationError):
        sg.gamma_contour(2.0, nodes_per_ray=20)


def test_radial_rule_integrates_polynomials():
    r, w = sg.radial_rule(3.0, 64)
    assert np.sum(w * r ** 5) == pytest.approx(3.0 ** 6 / 6, rel=1e-14)
    assert np.sum(w * np.sqrt(r)) == pytest.approx(2 / 3 * 3.0 ** 1.5, rel=1e-8)


def test_nu_candidates():
    (nu,) = sg.nu_candidates(2.0)
    assert nu.factor == pytest.approx(-1, abs=1e-15)
    (nu,) = sg.nu_candidates(2.2)
    th1, th2 = sg.exact_gamma_angles(2.2)
    d = -2 * math.pi / 2.2
    assert (th2 + d, th1 + d) == pytest.approx((-2.2848, -0.2856), abs=1e-4)
    assert sg.nu_candidates(1.3) == []


@pytest.mark.parametrize("alpha", [2.0, 2.2])
def test_nu_preserves_w(alpha):
    w = sg.FractionalSymbol.monomial_symbol(1.0, alpha)
    rng = np.random.default_rng(3)
    for nu in sg.ray_nu_maps(alpha):
        k = rng.uniform(0.1, 5, 4000) * np.exp(1j * rng.uniform(-math.pi, math.pi, 4000))
        k = k[nu.valid_at(k)][:100]
        assert k.size == 100
        wk = np.asarray(w(k))
        assert np.max(np.abs(np.asarray(w(nu(k))) - wk) / (1 + np.abs(wk))) <= 1e-12


def test_nu_window_grid():
    for a in np.linspace(1.41, 2.49, 50).tolist():
        th1, th2 = sg.exact_gamma_angles(a)
        d = -2 * math.pi / a
        inside = bool(-math.pi < th1 + d < 0 and -math.pi < th2 + d < 0)
        assert bool(sg.nu_candidates(a)) is inside
        assert inside is (7 / 5 < a < 7 / 3)


@settings(max_examples=200, deadline=None)
@given(alpha=st.floats(0.05, 2.95), r=st.floats(1e-3, 1e3), frac=st.floats(-0.999, 0.999))
def test_branch_consistency(alpha, r, frac):
    th = frac * min(math.pi, math.pi / alpha)
    p = sg.principal_power(r * cmath.exp(1j * th), alpha)
    assert cmath.phase(p) == pytest.approx(alpha * th, abs=1e-12)
    assert abs(p) == pytest.approx(r ** alpha, rel=1e-12)
