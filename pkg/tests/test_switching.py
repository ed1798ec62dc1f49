import mpmath
import numpy as np
import pytest
from scipy import integrate, special

from udwharvest.errors import DomainError
from udwharvest.switching import (SwitchingFamily, SwitchingSpec, polynomial_tail_amplitude,
                                  truncated_edge_height)

T = 0.01
GAUSS = SwitchingSpec()
TRUNC = SwitchingSpec('truncated')
POLY = SwitchingSpec('polynomial', delta=9.4)


def _cos_transform(spec, w):
    # 2 * int_0^T chi(t) cos(w t) dt for an even compact switching
    val, _ = integrate.quad(spec.value, 0.0, spec.t_half, weight='cos', wvar=w,
                            epsabs=1e-14, epsrel=1e-12, limit=200)
    return 2.0 * val


def test_defaults():
    assert GAUSS.family is SwitchingFamily.GAUSSIAN
    assert GAUSS.sigma == pytest.approx(T / 5)
    assert GAUSS.causal_length == pytest.approx(2 * T)
    assert GAUSS.kappa_cutoff == 1e4
    assert POLY.nu == pytest.approx(9.9)
    assert not GAUSS.is_compact and TRUNC.is_compact and POLY.is_compact
    assert SwitchingSpec(t_half=0.02).sigma == pytest.approx(0.004)


@pytest.mark.parametrize('name, family', [
    ('cp', SwitchingFamily.POLYNOMIAL),
    ('compact_polynomial', SwitchingFamily.POLYNOMIAL),
    ('TG', SwitchingFamily.TRUNCATED),
    ('truncated-gaussian', SwitchingFamily.TRUNCATED),
    (' Gaussian ', SwitchingFamily.GAUSSIAN),
])
def test_family_aliases(name, family):
    assert SwitchingFamily.parse(name) is family


@pytest.mark.parametrize('kwargs', [
    {'family': 'lorentzian'},
    {'t_half': -1.0},
    {'t_half': 0.0},
    {'sigma': 0.0},
    {'delta': -0.5},
    {'t_half': np.nan},
    {'kappa_cutoff': 0.0},
])
def test_invalid_spec(kwargs):
    with pytest.raises(DomainError):
        SwitchingSpec(**kwargs)


def test_to_dict():
    d = POLY.to_dict()
    assert d == {'family': 'polynomial', 't_half': T, 'sigma': pytest.approx(T / 5),
                 'delta': 9.4, 'kappa_cutoff': 1e4}


def test_support():
    t = np.array([-1.5 * T, -T, 0.0, 0.5 * T, 1.01 * T])
    for spec in (TRUNC, POLY):
        v = spec.value(t)
        assert v[0] == 0.0 and v[-1] == 0.0
        assert np.all(v[1:4] >= 0)
    assert np.all(GAUSS.value(t) > 0)
    assert POLY.value(0.0) == pytest.approx(POLY.peak)
    assert SwitchingSpec('polynomial', delta=0.0).value(0.99 * T) == pytest.approx(1 / (2 * T))


@pytest.mark.parametrize('spec', [GAUSS, POLY, SwitchingSpec('polynomial', delta=1.9)])
def test_unit_integral(spec):
    lim = 12 * spec.sigma if spec.family is SwitchingFamily.GAUSSIAN else spec.t_half
    area, _ = integrate.quad(spec.value, -lim, lim, epsabs=1e-13, epsrel=1e-12)
    assert area == pytest.approx(1.0, rel=1e-10)
    assert spec.fourier(0.0) == pytest.approx(1.0, rel=1e-14)


def test_truncated_dc_component():
    assert TRUNC.fourier(0.0) == pytest.approx(special.erf(5 / np.sqrt(2)), rel=1e-13)


@pytest.mark.parametrize('spec', [TRUNC, POLY, SwitchingSpec('polynomial', delta=1.0)])
@pytest.mark.parametrize('wt', [0.0, 0.7, 5.0, 24.49, 100.0])
def test_fourier_against_direct_transform(spec, wt):
    w = wt / T
    assert spec.fourier(w) == pytest.approx(_cos_transform(spec, w), rel=1e-8, abs=1e-11)


def test_fourier_even_and_vectorized():
    w = np.linspace(-5000, 5000, 101)
    for spec in (GAUSS, TRUNC, POLY):
        out = spec.fourier(w)
        assert out.shape == w.shape
        np.testing.assert_array_equal(out, out[::-1])


def test_polynomial_fourier_mpmath():
    mpmath.mp.dps = 30
    delta = mpmath.mpf('9.4')
    norm = mpmath.quad(lambda t: (1 - t * t)**delta, [-1, 1])
    for z in (0.5, 20.0, 61.3):
        ref = mpmath.quad(lambda t: (1 - t * t)**delta * mpmath.cos(z * t), [-1, 0, 1]) / norm
        assert POLY.fourier(z / T) == pytest.approx(float(ref), rel=1e-10, abs=1e-15)


def test_polynomial_series_branch_is_continuous():
    below = POLY.fourier(0.99999e-4 / T)
    above = POLY.fourier(1.00001e-4 / T)
    assert below == pytest.approx(above, rel=1e-12)


def test_gaussian_fourier_closed_form():
    w = np.array([0.0, 100.0, 2449.0])
    np.testing.assert_allclose(GAUSS.fourier(w), np.exp(-0.5 * (GAUSS.sigma * w)**2), rtol=1e-15)


def test_tail_constants():
    # the truncated transform oscillates inside 2 chi(T) T / (wT) far out
    e = truncated_edge_height(TRUNC)
    assert e == pytest.approx(TRUNC.peak * np.exp(-12.5) * T)
    wt = np.linspace(4000.0, 6000.0, 2001)
    envelope = np.abs(TRUNC.fourier(wt / T)) * wt / (2 * e)
    assert envelope.max() <= 1.001
    assert envelope.max() >= 0.99
    amp = polynomial_tail_amplitude(POLY)
    assert amp == pytest.approx(np.exp(2 * special.gammaln(10.9)) * 4**9.9 / np.pi, rel=1e-12)
    assert POLY.decay_power == pytest.approx(10.4)
    assert TRUNC.decay_power == 1.0
    assert GAUSS.decay_power == np.inf


@pytest.mark.parametrize('spec, w_max', [
    (GAUSS, 12.0 / GAUSS.sigma),
    (TRUNC, 200.0 / TRUNC.sigma),
    (POLY, 100.0 / T),
    (SwitchingSpec('polynomial', delta=1.9), 2000.0 / T),
])
def test_plancherel(spec, w_max):
    lim = 12 * spec.sigma if spec.family is SwitchingFamily.GAUSSIAN else spec.t_half
    energy, _ = integrate.quad(lambda t: spec.value(t)**2, -lim, lim, epsabs=1e-10, epsrel=1e-12, limit=200)
    # chi~ is even, so (1/2pi) int over the line is (1/pi) int over [0, w_max]
    spectrum, _ = integrate.quad(lambda w: spec.fourier(w)**2, 0.0, w_max, epsabs=1e-10, epsrel=1e-11,
                                 limit=4000)
    assert spectrum / np.pi == pytest.approx(energy, rel=1e-8)
