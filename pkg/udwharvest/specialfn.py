"""Special-function kernel: erfc, complex erf, Dawson and Faddeeva.

All functions accept scalars or numpy arrays and return the same shape.
The scaled kernels (erfcx, wofz) from scipy.special do the heavy lifting so
that no exponentially large intermediate is ever formed.
"""
import numpy as np
from scipy import special

from .errors import DomainError

# |Re z|, |Im z| bound on which erf_complex guarantees its accuracy
ERF_DOMAIN = 30.0
ERFC_SCALED_CROSSOVER = 30.0


def _unwrap(out):
    return out.item() if np.ndim(out) == 0 else out


def erfc_real(x):
    """Complementary error function of a real argument."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError('erfc_real needs finite input')
    with np.errstate(under='ignore'):
        out = np.where(
            x > ERFC_SCALED_CROSSOVER,
            np.exp(-np.square(x)) * special.erfcx(x),
            special.erfc(x),
        )
    return _unwrap(out)


def erfc_scaled(x):
    """erfcx(x) = exp(x^2) erfc(x)."""
    return _unwrap(special.erfcx(np.asarray(x, dtype=float)))


def faddeeva(z):
    """w(z) = exp(-z^2) erfc(-iz)."""
    return _unwrap(special.wofz(np.asarray(z, dtype=complex)))


def erf_complex(z):
    """Error function of a complex argument on |Re z|, |Im z| <= 30.

    Raises DomainError outside that box, and inside it where the value
    itself exceeds double range (|Im z| large with small |Re z|).
    """
    z = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(z)):
        raise DomainError('erf_complex needs finite input')
    if np.any(np.abs(z.real) > ERF_DOMAIN) or np.any(np.abs(z.imag) > ERF_DOMAIN):
        raise DomainError(f'erf_complex argument outside |Re|,|Im| <= {ERF_DOMAIN}')
    with np.errstate(over='ignore', invalid='ignore'):
        out = special.erf(z)
    if not np.all(np.isfinite(out)):
        raise DomainError('erf_complex overflows double precision for this argument')
    return _unwrap(out)


def dawson(x):
    """Dawson integral D(x) = exp(-x^2) * integral_0^x exp(t^2) dt."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError('dawson needs finite input')
    return _unwrap(special.dawsn(x))


def dawson_ratio(b):
    """D(b)/b with its limit 1 at b = 0."""
    b = np.asarray(b, dtype=float)
    safe = np.where(b == 0.0, 1.0, b)
    return _unwrap(np.where(b == 0.0, 1.0, special.dawsn(safe) / safe))
