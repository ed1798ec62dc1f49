import mpmath
import numpy as np
import pytest

from udwharvest.errors import DomainError
from udwharvest.specialfn import (dawson, dawson_ratio, erf_complex, erfc_real, erfc_scaled,
                                  faddeeva)

mpmath.mp.dps = 40


def _erfc_asymptotic(x, terms=8):
    # exp(-x^2)/(x sqrt(pi)) * sum (-1)^n (2n-1)!! / (2x^2)^n
    total, term = 1.0, 1.0
    for n in range(1, terms + 1):
        term *= -(2 * n - 1) / (2.0 * x * x)
        total += term
    return np.exp(-x * x) / (x * np.sqrt(np.pi)) * total


@pytest.mark.parametrize('x', [-2.0, 0.0, 0.3, 1.7, 4.898, 12.0, 25.0])
def test_erfc_real_mpmath(x):
    ref = float(mpmath.erfc(mpmath.mpf(x)))
    assert erfc_real(x) == pytest.approx(ref, rel=1e-12)


def test_erfc_real_asymptotic():
    assert erfc_real(10.0) == pytest.approx(_erfc_asymptotic(10.0), rel=1e-8)


def test_erfc_real_underflow_and_array():
    assert erfc_real(35.0) == 0.0
    x = np.array([[0.5, 1.0], [2.0, 40.0]])
    out = erfc_real(x)
    assert out.shape == x.shape
    assert out[1, 1] == 0.0
    with pytest.raises(DomainError):
        erfc_real(np.nan)


@pytest.mark.parametrize('x', [0.0, 0.5, 3.0, 40.0])
def test_erfc_scaled_mpmath(x):
    mx = mpmath.mpf(x)
    ref = float(mpmath.exp(mx * mx) * mpmath.erfc(mx))
    assert erfc_scaled(x) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize('z', [0.5 + 0.5j, 2.0 + 4.0j, 5.0 + 0.1j, -1.0 + 3.0j])
def test_faddeeva_mpmath(z):
    mz = mpmath.mpc(z)
    ref = complex(mpmath.exp(-mz * mz) * mpmath.erfc(-1j * mz))
    assert abs(faddeeva(z) - ref) <= 1e-12 * abs(ref)


def test_erf_complex_values():
    assert erf_complex(0j) == 0
    z = 2.5 + 2.5j
    ref = complex(mpmath.erf(mpmath.mpc(z)))
    assert abs(erf_complex(z) - ref) <= 1e-10 * abs(ref)
    for x in [0.3, 1.0, 2.5]:
        assert erf_complex(complex(x, 0.0)).real == pytest.approx(1.0 - erfc_real(x), rel=1e-12)


def test_erf_complex_symmetry():
    rng = np.random.default_rng(3)
    z = rng.uniform(-5, 5, size=50) + 1j * rng.uniform(-5, 5, size=50)
    w = erf_complex(z)
    np.testing.assert_allclose(erf_complex(-z), -w, rtol=1e-12, atol=1e-13)
    np.testing.assert_allclose(erf_complex(np.conj(z)), np.conj(w), rtol=1e-12, atol=1e-13)


def test_erf_complex_domain():
    with pytest.raises(DomainError):
        erf_complex(31.0 + 0j)
    with pytest.raises(DomainError):
        erf_complex(0.1 - 30.5j)
    # inside the box but exp(y^2) overflows
    with pytest.raises(DomainError):
        erf_complex(0.1 + 29.0j)
    with pytest.raises(DomainError):
        erf_complex(complex(np.inf, 0.0))


@pytest.mark.parametrize('x', [0.01, 0.5, 0.924, 2.0, 7.5])
def test_dawson_mpmath(x):
    mx = mpmath.mpf(x)
    ref = float(mpmath.sqrt(mpmath.pi) / 2 * mpmath.exp(-mx * mx) * mpmath.erfi(mx))
    assert dawson(x) == pytest.approx(ref, rel=1e-12)


def test_dawson_large_and_odd():
    x = 50.0
    assert dawson(x) == pytest.approx(1 / (2 * x) * (1 + 1 / (2 * x * x) + 3 / (4 * x**4)), rel=1e-8)
    xs = np.linspace(0.1, 10.0, 25)
    np.testing.assert_allclose(dawson(-xs), -dawson(xs), rtol=1e-15)


def test_dawson_ratio():
    assert dawson_ratio(0.0) == 1.0
    b = np.array([0.0, 1e-8, 0.3, 5.0])
    out = dawson_ratio(b)
    assert out[0] == 1.0
    assert out[1] == pytest.approx(1.0, rel=1e-12)
    np.testing.assert_allclose(out[2:], dawson(b[2:]) / b[2:], rtol=1e-15)
