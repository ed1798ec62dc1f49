import mpmath
import numpy as np
import pytest

from udwharvest.elements import (ElementParams, PairElements, c_element, commutator_ratios, element_arrays,
                                 gaussian_arrays, gaussian_elements, p_element, p_needs_cutoff,
                                 plus_elements, quadrature_elements)
from udwharvest.errors import DomainError, NotComputedError
from udwharvest.negativity import negativity_two_closed
from udwharvest.switching import SwitchingSpec

T = 0.01
L = 2 * T
SIGMA = T / 5
GAUSS = SwitchingSpec()
TRUNC = SwitchingSpec('truncated')
POLY = SwitchingSpec('polynomial', delta=9.4)


def _pref(x):
    return 1.0 / (8 * np.pi**2 * x * T)


def test_p_closed_form_mpmath():
    mpmath.mp.dps = 40
    for omega_t in (0.0, 5.0, 24.49, 60.0):
        a = mpmath.mpf(omega_t / T * SIGMA)
        ref = (mpmath.exp(-a * a) - mpmath.sqrt(mpmath.pi) * a * mpmath.erfc(a)) / (8 * mpmath.pi**2 * SIGMA**2)
        assert p_element(1.0, omega_t / T, GAUSS) == pytest.approx(float(ref), rel=1e-12)


def test_p_scales_with_lambda_squared():
    assert p_element(0.3, 2449.0, GAUSS) == pytest.approx(0.09 * p_element(1.0, 2449.0, GAUSS), rel=1e-14)


def test_p_quadrature_matches_closed_form():
    for omega_t in (0.0, 10.0, 30.0):
        closed = p_element(1.0, omega_t / T, GAUSS)
        quad = p_element(1.0, omega_t / T, GAUSS, use_closed_form=False)
        assert quad == pytest.approx(closed, rel=1e-9)


def test_c_plus_erf_form():
    # C+ = lambda^2 exp(-b^2) Im[exp(i Omega x) erf(a + i b)] / (8 pi^1.5 x sigma)
    mpmath.mp.dps = 40
    for x_over_l, omega_t in ((0.3, 10.0), (1.0, 10.0), (2.0, 24.49)):
        x = x_over_l * L
        omega = omega_t / T
        a, b = mpmath.mpf(omega * SIGMA), mpmath.mpf(x / (2 * SIGMA))
        ref = (mpmath.exp(-b * b) * mpmath.im(mpmath.exp(1j * omega * x) * mpmath.erf(a + 1j * b))
               / (8 * mpmath.pi**1.5 * x * SIGMA))
        elems = gaussian_elements(ElementParams(omega=omega, x=x))
        assert elems.Cp.real == pytest.approx(float(ref), rel=1e-9)


def test_coincident_limit():
    omega = 1500.0
    p = p_element(1.0, omega, GAUSS)
    assert c_element(1.0, omega, GAUSS, 0.0) == p
    near = c_element(1.0, omega, GAUSS, 1e-4 * SIGMA)
    assert near.real == pytest.approx(p, rel=1e-6)


def test_gaussian_element_signs():
    e = gaussian_elements(ElementParams.dimensionless(24.49, 1.0))
    assert e.Xp.real < 0 and e.Xp.imag == 0
    assert e.Xm.real == 0 and e.Xm.imag > 0
    assert e.Cm.imag == 0
    assert e.harvests


def test_pair_reference_value():
    elems = gaussian_elements(ElementParams.dimensionless(24.49, 1.0))
    assert abs(elems.X) - elems.P == pytest.approx(9.284e-11, rel=0.01)
    assert negativity_two_closed(L, 24.49 / T) == pytest.approx(9.284e-11, rel=0.01)


def test_element_params_validation():
    with pytest.raises(DomainError):
        ElementParams(omega=-1.0)
    with pytest.raises(DomainError):
        ElementParams(omega=1.0, x=-L)
    with pytest.raises(DomainError):
        ElementParams(omega=1.0, lam=0.0)
    with pytest.raises(DomainError):
        gaussian_elements(ElementParams(omega=1.0, x=0.0))
    with pytest.raises(DomainError):
        gaussian_elements(ElementParams(omega=1.0, spec=POLY, x=L))
    with pytest.raises(DomainError):
        quadrature_elements(ElementParams(omega=1.0, spec=POLY, x=0.0))


def test_quadrature_matches_gaussian_closed_form():
    rng = np.random.default_rng(11)
    x_over_l = rng.uniform(0.1, 5.0, size=30)
    omega_t = rng.uniform(0.0, 35.0, size=30)
    for xl, wt in zip(x_over_l, omega_t):
        params = ElementParams.dimensionless(wt, xl)
        closed = gaussian_elements(params)
        quad = quadrature_elements(params)
        atol = 1e-11 * _pref(params.x)
        for name in ('Cp', 'Cm', 'Xp'):
            q, c = getattr(quad, name), getattr(closed, name)
            assert abs(q - c) <= 1e-8 * abs(c) + atol, (name, xl, wt)
        assert quad.Xm == closed.Xm


def test_compact_x_minus():
    below = quadrature_elements(ElementParams.dimensionless(20.0, 0.7, POLY))
    assert below.Xm is None
    with pytest.raises(NotComputedError):
        below.X
    # X+ alone decides the harvesting flag when X- is missing
    assert below.harvests == (abs(below.Xp) > below.P)
    at_l = quadrature_elements(ElementParams.dimensionless(20.0, 1.0, POLY))
    assert at_l.Xm == 0j
    assert at_l.X == at_l.Xp


@pytest.mark.parametrize('spec', [POLY, SwitchingSpec('polynomial', delta=2.0)])
def test_compact_commutator_vanishes_outside_light_cone(spec):
    rng = np.random.default_rng(5)
    for xl, wt in zip(rng.uniform(1.0, 3.0, size=10), rng.uniform(0.0, 35.0, size=10)):
        e = quadrature_elements(ElementParams.dimensionless(wt, xl, spec))
        assert abs(e.Cm) <= 1e-10 * _pref(xl * L)


@pytest.mark.slow
def test_truncated_commutator_vanishes_outside_light_cone():
    rng = np.random.default_rng(6)
    for xl, wt in zip(rng.uniform(1.0, 3.0, size=10), rng.uniform(0.0, 35.0, size=10)):
        e = quadrature_elements(ElementParams.dimensionless(wt, xl, TRUNC))
        assert abs(e.Cm) <= 1e-10 * _pref(xl * L)


def test_polynomial_p_mpmath():
    mpmath.mp.dps = 25
    nu = mpmath.mpf('9.9')
    omega_t = 10.0

    def f(z):
        return mpmath.gamma(nu + 1) * (z / 2)**(-nu) * mpmath.besselj(nu, z)

    integral = mpmath.quad(lambda k: k * f(k + omega_t)**2, [0, 5, 10, 20, 40, 80, 160, mpmath.inf])
    ref = float(integral / (4 * mpmath.pi**2 * T**2))
    assert p_element(1.0, omega_t / T, POLY) == pytest.approx(ref, rel=1e-8)


def test_p_cutoff_selection():
    assert p_needs_cutoff(TRUNC)
    assert p_needs_cutoff(SwitchingSpec('polynomial', delta=0.5))
    assert not p_needs_cutoff(POLY)
    assert not p_needs_cutoff(GAUSS)
    low = p_element(1.0, 2000.0, TRUNC, kappa_cutoff=1e3)
    high = p_element(1.0, 2000.0, TRUNC)
    # the truncated P grows logarithmically with the cutoff
    assert high > low > 0
    spec = SwitchingSpec('truncated', kappa_cutoff=1e3)
    assert p_element(1.0, 2000.0, spec) == low


def test_element_arrays_deduplicates_and_keeps_shape():
    d = np.array([[L, 2 * L], [2 * L, L]])
    c = element_arrays(2449.0, GAUSS, d, kind='C')
    x = element_arrays(2449.0, GAUSS, d, kind='X')
    assert c.shape == x.shape == (2, 2)
    assert c[0, 1] == c[1, 0] and c[0, 0] == c[1, 1]
    vals = gaussian_arrays(2449.0, L, SIGMA)
    assert x[0, 0] == pytest.approx(complex(vals["Xp"] + vals["Xm"]), rel=1e-14)
    with pytest.raises(ValueError):
        element_arrays(2449.0, GAUSS, d, kind='P')
    with pytest.raises(DomainError):
        element_arrays(2449.0, GAUSS, [0.0, L], kind='X')


def test_plus_elements_vectorized():
    omega = np.array([[1000.0], [2000.0]])
    dist = np.array([L, 2 * L, 3 * L])
    out = plus_elements(omega, GAUSS, dist)
    assert out['P'].shape == out['C'].shape == out['Xp'].shape == (2, 3)
    np.testing.assert_allclose(out['P'][1], p_element(1.0, 2000.0, GAUSS), rtol=1e-14)


def test_commutator_ratio_independent_of_gap():
    r1 = commutator_ratios(ElementParams.dimensionless(5.0, 0.5))
    r2 = commutator_ratios(ElementParams.dimensionless(30.0, 0.5))
    assert r1[1] == pytest.approx(r2[1], rel=1e-10)
    assert 0 < r1[0] and 0 < r1[1] < 1


def test_pair_elements_properties():
    e = PairElements(P=1.0, Cp=0.5 + 0j, Cm=-0.25 + 0j, Xp=-2.0 + 0j, Xm=1j)
    assert e.C == 0.25
    assert e.X == -2.0 + 1j
    assert e.harvests
    assert not PairElements(P=3.0, Cp=0j, Cm=0j, Xp=-2.0 + 0j, Xm=1j).harvests


@pytest.mark.parametrize('spec', [GAUSS, POLY, SwitchingSpec('polynomial', delta=2.0),
                                  pytest.param(TRUNC, marks=pytest.mark.slow)])
def test_p_decreases_with_gap(spec):
    p = [p_element(1.0, wt / T, spec) for wt in (0.0, 1.0, 3.0, 7.0, 15.0, 30.0)]
    assert np.all(np.diff(p) < 0)
    assert p[-1] > 0


@pytest.mark.parametrize('spec, omega_t', [(GAUSS, 5.0), (GAUSS, 10.0), (POLY, 0.5)])
def test_elements_decay_with_distance(spec, omega_t):
    dist = np.array([1.0, 1.5, 2.0, 3.0, 5.0, 8.0]) * L
    c = np.abs(element_arrays(omega_t / T, spec, dist, kind='C'))
    x = np.abs(element_arrays(omega_t / T, spec, dist, kind='X'))
    assert np.all(np.diff(c) < 0)
    assert np.all(np.diff(x) < 0)
