"""Second-order reduced-density-matrix elements for identical pointlike detectors.

P is the single-detector excitation probability, C the correlation between
single excitations of two detectors and X the vacuum/double-excitation
coherence. C and X split into the parts driven by the symmetric (+) and
antisymmetric, commutator (-) halves of the Wightman function.

Gaussian switching has closed forms. The compact families go through
k-space integrals in dimensionless kappa = kT, omega = Omega T, xi = x/T.
"""
import functools
from dataclasses import dataclass
from typing import Optional

import numpy as np
from loguru import logger

from . import quadrature
from .errors import DomainError, NotComputedError
from .specialfn import dawson_ratio, erfc_scaled, faddeeva
from .switching import (SwitchingFamily, SwitchingSpec, fourier, polynomial_tail_amplitude)
from .utils import timed_profile

# separations below this many sigma are treated as coincident
COINCIDENT_SIGMA = 1e-6
GAUSSIAN_DECAY_WIDTHS = 12.0
COMPACT_START = 64.0


@dataclass(frozen=True)
class ElementParams:
    omega: float
    spec: SwitchingSpec = SwitchingSpec()
    x: float = 0.0
    lam: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise DomainError(f'lam must be positive, got {self.lam}')
        if not (np.isfinite(self.omega) and self.omega >= 0):
            raise DomainError(f'omega must be non-negative, got {self.omega}')
        if not (np.isfinite(self.x) and self.x >= 0):
            raise DomainError(f'x must be non-negative, got {self.x}')

    @classmethod
    def dimensionless(cls, omega_t: float, x_over_l: float, spec: SwitchingSpec = SwitchingSpec(),
                      lam: float = 1.0) -> 'ElementParams':
        return cls(omega=omega_t / spec.t_half, spec=spec, x=x_over_l * spec.causal_length, lam=lam)


@dataclass(frozen=True)
class PairElements:
    P: float
    Cp: complex
    Cm: complex
    Xp: complex
    Xm: Optional[complex]

    @property
    def C(self) -> complex:
        return self.Cp + self.Cm

    @property
    def X(self) -> complex:
        if self.Xm is None:
            raise NotComputedError('X- is not computed for compact switching below x = 2T')
        return self.Xp + self.Xm

    @property
    def harvests(self) -> bool:
        """|X| > P, the two-detector harvesting condition."""
        xm = 0.0 if self.Xm is None else self.Xm
        return abs(self.Xp + xm) > self.P


def gaussian_arrays(omega, x, sigma: float, lam: float = 1.0) -> dict:
    """Closed-form Gaussian elements, broadcast over omega and x arrays.

    Returns P, C, Cm, Xp and Xm; Cp is C - Cm. C is evaluated through the
    Faddeeva function, which equals the erf form of C+ plus C- without its
    exp(x^2/4 sigma^2) cancellation.
    """
    omega = np.asarray(omega, dtype=float)
    x = np.asarray(x, dtype=float)
    a = omega * sigma
    b = x / (2.0 * sigma)
    damp = np.exp(-np.square(a))
    scale = lam**2 / (8.0 * np.pi**2 * sigma**2)
    p = scale * damp * (1.0 - np.sqrt(np.pi) * a * erfc_scaled(a))
    coincident = x < COINCIDENT_SIGMA * sigma
    x_safe = np.where(coincident, 1.0, x)
    k = lam**2 / (8.0 * np.pi**1.5 * x_safe * sigma)
    c = np.where(coincident, p, k * damp * np.imag(faddeeva(b + 1j * a)))
    cm = -(lam**2 * omega / (8.0 * np.pi**1.5 * sigma)) * np.exp(-np.square(b)) * np.sinc(omega * x / np.pi)
    xp = -scale * damp * dawson_ratio(b)
    # X- carries the bare 1/x of the commutator; it is infinite for coincident detectors
    with np.errstate(divide='ignore', invalid='ignore'):
        xm = 1j * (lam**2 / (8.0 * np.pi**1.5 * x * sigma)) * damp * np.exp(-np.square(b))
    return {'P': p, 'C': c, 'Cm': cm, 'Xp': xp, 'Xm': xm}


def gaussian_elements(p: ElementParams) -> PairElements:
    if p.spec.family is not SwitchingFamily.GAUSSIAN:
        raise DomainError('gaussian_elements needs Gaussian switching')
    if p.x == 0:
        raise DomainError('pair formulas are singular at x = 0; use p_element')
    vals = gaussian_arrays(p.omega, p.x, p.spec.sigma, p.lam)
    c, cm = float(vals['C']), float(vals['Cm'])
    return PairElements(P=float(vals['P']), Cp=complex(c - cm), Cm=complex(cm),
                        Xp=complex(float(vals['Xp'])), Xm=complex(vals['Xm']))


def _sine_start(spec: SwitchingSpec, omega_t: float) -> float:
    if spec.family is SwitchingFamily.GAUSSIAN:
        return omega_t + GAUSSIAN_DECAY_WIDTHS * spec.t_half / spec.sigma
    return 2.0 * omega_t + COMPACT_START


def _integrand(spec: SwitchingSpec, omega_t: float, xi: float):
    t_half = spec.t_half

    def func(kappa):
        fp = fourier(spec, (kappa + omega_t) / t_half)
        fm = fourier(spec, (kappa - omega_t) / t_half)
        s = np.sin(kappa * xi)
        return np.stack([s * (fp * fp + fm * fm), s * (fp * fp - fm * fm), s * fp * fm])

    return func


@functools.lru_cache(maxsize=4096)
def _quadrature_cached(omega: float, spec: SwitchingSpec, x: float, lam: float) -> PairElements:
    t_half = spec.t_half
    omega_t, xi = omega * t_half, x / t_half
    tail = None if spec.family is SwitchingFamily.GAUSSIAN else quadrature.envelope_tail(2.0 * spec.decay_power)
    cp, cm, xp = quadrature.half_line(_integrand(spec, omega_t, xi), _sine_start(spec, omega_t),
                                      min(1.0, 2.0 / xi), tail=tail)
    pref = lam**2 / (8.0 * np.pi**2 * x * t_half)
    if spec.family is SwitchingFamily.GAUSSIAN:
        xm = complex(gaussian_arrays(omega, x, spec.sigma, lam)['Xm'])
    elif x >= spec.causal_length * (1.0 - 1e-12):
        xm = 0j
    else:
        xm = None
    return PairElements(P=p_element(lam, omega, spec), Cp=complex(pref * cp), Cm=complex(pref * cm),
                        Xp=complex(-2.0 * pref * xp), Xm=xm)


@timed_profile
def quadrature_elements(p: ElementParams) -> PairElements:
    """Elements from the k-space integrals; valid for every switching family.

    X- is the Gaussian closed form, exactly 0 for compact switching at
    x >= 2T (the commutator vanishes there) and None below that.
    """
    if p.x < COINCIDENT_SIGMA * p.spec.sigma:
        raise DomainError('quadrature elements need a non-coincident pair; use p_element')
    return _quadrature_cached(float(p.omega), p.spec, float(p.x), float(p.lam))


def _polynomial_p_tail(spec: SwitchingSpec, omega_t: float):
    amp = polynomial_tail_amplitude(spec)
    two_nu = 2.0 * spec.nu

    def tail(func, upper):
        u = upper + omega_t
        correction = amp * (u**(1.0 - two_nu) / (two_nu - 1.0) - omega_t * u**(-two_nu) / two_nu)
        return np.array([correction]), np.array([amp * upper**(-two_nu)])

    return tail


def p_needs_cutoff(spec: SwitchingSpec) -> bool:
    """True when the P integrand decays no faster than kappa^-2 and is cut at spec.kappa_cutoff."""
    return spec.family is SwitchingFamily.TRUNCATED or (
        spec.family is SwitchingFamily.POLYNOMIAL and spec.delta <= 0.5)


@functools.lru_cache(maxsize=4096)
def _p_quadrature(lam: float, omega: float, spec: SwitchingSpec, kappa_cutoff: float) -> float:
    t_half = spec.t_half
    omega_t = omega * t_half

    def func(kappa):
        f = fourier(spec, (kappa + omega_t) / t_half)
        return kappa * f * f

    if spec.family is SwitchingFamily.GAUSSIAN:
        val = quadrature.half_line(func, GAUSSIAN_DECAY_WIDTHS * t_half / spec.sigma, 1.0)
    elif p_needs_cutoff(spec):
        logger.debug(f"P for {spec.family.value} cut at kappa={kappa_cutoff:g}")
        val = quadrature.finite_range(func, kappa_cutoff, 1.0)
    else:
        val = quadrature.half_line(func, omega_t + COMPACT_START, 1.0, tail=_polynomial_p_tail(spec, omega_t))
    return float(lam**2 / (4.0 * np.pi**2 * t_half**2) * val[0])


def p_element(lam: float, omega: float, spec: SwitchingSpec, use_closed_form: bool = True,
              kappa_cutoff: float = None) -> float:
    """Excitation probability P, the x -> 0 limit of C.

    kappa_cutoff overrides spec.kappa_cutoff for the families whose P is
    UV-divergent (see p_needs_cutoff).
    """
    ElementParams(omega=omega, spec=spec, lam=lam)
    if spec.family is SwitchingFamily.GAUSSIAN and use_closed_form:
        return float(gaussian_arrays(omega, 0.0, spec.sigma, lam)['P'])
    kappa_cutoff = spec.kappa_cutoff if kappa_cutoff is None else kappa_cutoff
    return _p_quadrature(float(lam), float(omega), spec, float(kappa_cutoff))


def c_element(lam: float, omega: float, spec: SwitchingSpec, x: float) -> complex:
    """C at separation x; coincident detectors give P."""
    if x < COINCIDENT_SIGMA * spec.sigma:
        return complex(p_element(lam, omega, spec))
    params = ElementParams(omega=omega, spec=spec, x=x, lam=lam)
    if spec.family is SwitchingFamily.GAUSSIAN:
        return gaussian_elements(params).C
    return quadrature_elements(params).C


def element_arrays(omega: float, spec: SwitchingSpec, distances, lam: float = 1.0, kind: str = 'C'):
    """C or X for every entry of a distance array, one evaluation per distinct distance."""
    distances = np.asarray(distances, dtype=float)
    if kind not in ('C', 'X'):
        raise ValueError(f"kind must be 'C' or 'X', got {kind!r}")
    uniq, inverse = np.unique(distances, return_inverse=True)
    if spec.family is SwitchingFamily.GAUSSIAN:
        if kind == 'X' and np.any(uniq <= 0):
            raise DomainError('X is singular for coincident detectors')
        vals = gaussian_arrays(omega, uniq, spec.sigma, lam)
        out = vals['C'].astype(complex) if kind == 'C' else vals['Xp'] + vals['Xm']
    else:
        out = np.empty(uniq.size, dtype=complex)
        for n, dist in enumerate(uniq):
            if kind == 'C':
                out[n] = c_element(lam, omega, spec, dist)
            else:
                out[n] = quadrature_elements(ElementParams(omega=omega, spec=spec, x=dist, lam=lam)).X
    return out[inverse].reshape(distances.shape)


def plus_elements(omega, spec: SwitchingSpec, distances, lam: float = 1.0) -> dict:
    """P with C and X+ at the given distances, the inputs of the closed negativity forms.

    Gaussian switching evaluates vectorized over omega and distances; the
    compact families need scalar omega.
    """
    if spec.family is SwitchingFamily.GAUSSIAN:
        vals = gaussian_arrays(omega, distances, spec.sigma, lam)
        return {'P': vals['P'] + 0.0 * vals['C'], 'C': vals['C'], 'Xp': vals['Xp']}
    distances = np.asarray(distances, dtype=float)
    c = element_arrays(omega, spec, distances, lam, kind='C').real
    xp = np.empty(distances.shape)
    for idx, dist in np.ndenumerate(distances):
        xp[idx] = quadrature_elements(ElementParams(omega=omega, spec=spec, x=float(dist), lam=lam)).Xp.real
    p = p_element(lam, omega, spec)
    return {'P': np.full(distances.shape, p), 'C': c, 'Xp': xp}


def commutator_ratios(p: ElementParams) -> tuple:
    """(|C-|/|C|, |X-|/|X|): the commutator share of each correlation."""
    elems = gaussian_elements(p) if p.spec.family is SwitchingFamily.GAUSSIAN else quadrature_elements(p)
    c = abs(elems.C)
    ratio_c = abs(elems.Cm) / c if c > 0 else np.nan
    ratio_x = abs(elems.Xm) / abs(elems.X) if elems.Xm is not None else np.nan
    return float(ratio_c), float(ratio_x)
