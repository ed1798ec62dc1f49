"""Switching functions chi(t) and their Fourier transforms.

Three even families are supported:

  gaussian     normalized Gaussian of width sigma over the whole real line
  truncated    the same Gaussian cut to [-T, T], not renormalized
  polynomial   N (1 - t^2/T^2)^delta on [-T, T], unit integral

Fourier convention: chi~(w) = integral chi(t) exp(-i w t) dt. All three
transforms are real and even, so they are evaluated as functions of |w|.
"""
import enum
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError

DEFAULT_T = 0.01
SIGMA_PER_T = 0.2
DEFAULT_DELTA = 9.4
# dimensionless kT cutoff for P integrals that diverge for pointlike detectors
DEFAULT_KAPPA_CUTOFF = 1e4


class SwitchingFamily(str, enum.Enum):
    GAUSSIAN = 'gaussian'
    TRUNCATED = 'truncated'
    POLYNOMIAL = 'polynomial'

    @classmethod
    def parse(cls, name) -> 'SwitchingFamily':
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace('_', '-')
        aliases = {
            'truncated-gaussian': cls.TRUNCATED,
            'compact-polynomial': cls.POLYNOMIAL,
            'cp': cls.POLYNOMIAL,
            'tg': cls.TRUNCATED,
        }
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise DomainError(f'unknown switching family {name!r}') from None


@dataclass(frozen=True)
class SwitchingSpec:
    family: SwitchingFamily = SwitchingFamily.GAUSSIAN
    t_half: float = DEFAULT_T
    sigma: float = None
    delta: float = DEFAULT_DELTA
    kappa_cutoff: float = DEFAULT_KAPPA_CUTOFF

    def __post_init__(self):
        object.__setattr__(self, 'family', SwitchingFamily.parse(self.family))
        if self.sigma is None:
            object.__setattr__(self, 'sigma', SIGMA_PER_T * self.t_half)
        for name in ('t_half', 'sigma', 'delta', 'kappa_cutoff'):
            val = getattr(self, name)
            if not np.isfinite(val):
                raise DomainError(f'{name} must be finite, got {val}')
        if self.t_half <= 0 or self.sigma <= 0:
            raise DomainError(f't_half and sigma must be positive, got {self.t_half}, {self.sigma}')
        if self.delta < 0:
            raise DomainError(f'delta must be non-negative, got {self.delta}')
        if not self.kappa_cutoff > 0:
            raise DomainError(f'kappa_cutoff must be positive, got {self.kappa_cutoff}')

    @property
    def is_compact(self) -> bool:
        return self.family is not SwitchingFamily.GAUSSIAN

    @property
    def causal_length(self) -> float:
        """L = 2T, the minimal separation of effectively spacelike detectors."""
        return 2.0 * self.t_half

    @property
    def nu(self) -> float:
        return self.delta + 0.5

    @property
    def peak(self) -> float:
        """chi(0)."""
        if self.family is SwitchingFamily.POLYNOMIAL:
            return np.exp(special.gammaln(self.delta + 1.5) - special.gammaln(self.delta + 1.0)) / (
                np.sqrt(np.pi) * self.t_half)
        return 1.0 / (np.sqrt(2.0 * np.pi) * self.sigma)

    @property
    def decay_power(self) -> float:
        """q such that |chi~(w)| is bounded by A |w T|^-q at large |w|."""
        if self.family is SwitchingFamily.GAUSSIAN:
            return np.inf
        if self.family is SwitchingFamily.TRUNCATED:
            return 1.0
        return self.delta + 1.0

    def value(self, t):
        return value(self, t)

    def fourier(self, w):
        return fourier(self, w)

    def to_dict(self) -> dict:
        return {'family': self.family.value, 't_half': self.t_half,
                'sigma': self.sigma, 'delta': self.delta, 'kappa_cutoff': self.kappa_cutoff}


def value(spec: SwitchingSpec, t):
    """chi(t); non-negative and zero outside [-T, T] for the compact families."""
    t = np.asarray(t, dtype=float)
    if spec.family is SwitchingFamily.POLYNOMIAL:
        u = np.clip(1.0 - np.square(t / spec.t_half), 0.0, None)
        if spec.delta == 0:
            out = np.where(np.abs(t) <= spec.t_half, spec.peak, 0.0)
        else:
            out = spec.peak * np.power(u, spec.delta)
    else:
        out = spec.peak * np.exp(-0.5 * np.square(t / spec.sigma))
        if spec.family is SwitchingFamily.TRUNCATED:
            out = np.where(np.abs(t) <= spec.t_half, out, 0.0)
    return out.item() if out.ndim == 0 else out


def fourier(spec: SwitchingSpec, w):
    """chi~(w), real and even."""
    w = np.abs(np.asarray(w, dtype=float))
    if spec.family is SwitchingFamily.GAUSSIAN:
        out = np.exp(-0.5 * np.square(spec.sigma * w))
    elif spec.family is SwitchingFamily.TRUNCATED:
        out = _truncated_fourier(w, spec.sigma, spec.t_half)
    else:
        out = _polynomial_fourier(w * spec.t_half, spec.nu)
    return out.item() if np.ndim(out) == 0 else out


def _truncated_fourier(w, sigma, t_half):
    # exp(-s^2w^2/2) Re erf((T + i s^2 w)/(sqrt2 s)), rewritten through w(z) so
    # that nothing grows like exp(s^2 w^2 / 2)
    z = (-sigma**2 * w + 1j * t_half) / (np.sqrt(2.0) * sigma)
    edge = np.exp(-0.5 * (t_half / sigma)**2) * np.exp(-1j * t_half * w) * special.wofz(z)
    return np.exp(-0.5 * np.square(sigma * w)) - edge.real


def _polynomial_fourier(z, nu):
    # Gamma(nu+1) (z/2)^-nu J_nu(z) = 0F1(; nu+1; -z^2/4)
    z = np.asarray(z, dtype=float)
    small = z < 1e-4
    zs = np.where(small, 1.0, z)
    with np.errstate(over='ignore', under='ignore'):
        big = np.exp(special.gammaln(nu + 1.0) - nu * np.log(0.5 * zs)) * special.jv(nu, zs)
    series = 1.0 - np.square(z) / (4.0 * (nu + 1.0)) + z**4 / (32.0 * (nu + 1.0) * (nu + 2.0))
    return np.where(small, series, big)


def polynomial_tail_amplitude(spec: SwitchingSpec) -> float:
    """A with chi~(k)^2 averaging to A (kT)^-(2 nu + 1) at large k (mean of J_nu^2 is 1/(pi z))."""
    nu = spec.nu
    return float(np.exp(2.0 * special.gammaln(nu + 1.0) + nu * np.log(4.0)) / np.pi)


def truncated_edge_height(spec: SwitchingSpec) -> float:
    """chi(T) T, which sets the 2 chi(T) sin(wT)/w tail of the truncated Gaussian."""
    return float(spec.peak * np.exp(-0.5 * (spec.t_half / spec.sigma)**2) * spec.t_half)
