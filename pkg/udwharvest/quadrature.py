"""k-space integrals on [0, inf) through scipy's adaptive vector quadrature.

Integrands are callables mapping dimensionless wavenumbers kappa = kT, scalar
or array, to one value per component, so several element integrals that share
the same switching-function evaluations are accumulated by one
`scipy.integrate.quad_vec` call. Breakpoints every `width` in kappa (at most
MAX_BREAKPOINTS per call) keep the Gauss-Kronrod rule from stepping over
oscillations. The half line is covered by doubling the upper limit until an
analytic tail bound is small enough.
"""
import warnings

import numpy as np
from loguru import logger
from scipy import integrate

from .errors import QuadratureError

RTOL = 1e-10
ATOL = 1e-16
TAIL_RTOL = 1e-9
KAPPA_BUDGET = 2e5
MAX_INTERVALS = 20000
MAX_BREAKPOINTS = 1024


def _as_components(values, npts):
    values = np.asarray(values)
    if values.ndim == 1:
        values = values[None, :]
    return values.reshape(values.shape[0], npts)


def panel_edges(lo: float, hi: float, width: float) -> np.ndarray:
    n = max(1, int(np.ceil((hi - lo) / width - 1e-9)))
    return np.linspace(lo, hi, n + 1)


def integrate_range(func, lo: float, hi: float, width: float, rtol: float = RTOL, atol: float = ATOL):
    """Integral over [lo, hi] of every component of func, as a 1D array."""
    edges = panel_edges(lo, hi, max(width, (hi - lo) / MAX_BREAKPOINTS))
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', integrate.IntegrationWarning)
        val, err, info = integrate.quad_vec(lambda k: np.atleast_1d(func(k)), lo, hi, epsabs=atol, epsrel=rtol,
                                            norm='max', limit=MAX_INTERVALS, points=edges[1:-1],
                                            full_output=True)
    if not info.success:
        raise QuadratureError(f'quad_vec on [{lo:.4g}, {hi:.4g}] failed: {info.message} (error {np.max(err):.3g})')
    logger.debug(f"[{lo:.4g}, {hi:.4g}]: {info.neval} evaluations, error {np.max(err):.3g}")
    return np.atleast_1d(val)


def envelope_tail(power: float, samples: int = 513):
    """Tail model for integrands bounded by A kappa^-power; returns no correction."""
    if power <= 1.0:
        raise QuadratureError(f'integrand decaying like kappa^-{power} is not integrable')

    def tail(func, upper):
        kappa = np.linspace(0.5 * upper, upper, samples)
        vals = _as_components(func(kappa), kappa.size)
        amplitude = 2.0 * np.max(np.abs(vals) * kappa**power, axis=1)
        bound = amplitude * upper**(1.0 - power) / (power - 1.0)
        return np.zeros_like(bound), bound

    return tail


def half_line(func, start: float, width: float, tail=None, rtol: float = RTOL,
              atol: float = ATOL, tail_rtol: float = TAIL_RTOL, budget: float = KAPPA_BUDGET):
    """Integral over [0, inf) of every component of func.

    With tail=None the integrand is taken as negligible beyond `start`
    (Gaussian decay). Otherwise the upper limit doubles until the tail
    model's bound falls below max(atol, tail_rtol * |value|).
    """
    upper = float(start)
    total = integrate_range(func, 0.0, upper, width, rtol, atol)
    if tail is None:
        return total
    while True:
        correction, bound = tail(func, upper)
        if np.all(bound <= np.maximum(atol, tail_rtol * np.abs(total + correction))):
            logger.debug(f"half-line integral converged at kappa={upper:.4g}")
            return total + correction
        if 2.0 * upper > budget:
            raise QuadratureError(
                f'tail bound {np.max(bound):.3g} still above tolerance at kappa={upper:.4g}')
        # tail pieces only need to be accurate against the running total
        piece_atol = max(atol, rtol * float(np.max(np.abs(total))))
        total = total + integrate_range(func, upper, 2.0 * upper, width, rtol, piece_atol)
        upper *= 2.0


def finite_range(func, upper: float, width: float, rtol: float = RTOL, atol: float = ATOL):
    """Integral over [0, upper] of every component of func."""
    return integrate_range(func, 0.0, upper, width, rtol, atol)
