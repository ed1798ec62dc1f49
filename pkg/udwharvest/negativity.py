"""Leading-order negativity from the partially transposed one-excitation block.

At order lambda^2 all negativity sits in the N x N block rho1~ built from P,
C (same-subsystem pairs) and X (cross pairs). Rows run over B detectors in
descending index, then A detectors in descending index, the binary order of
the one-excitation computational states.
"""
import enum
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from loguru import logger

from .elements import element_arrays, gaussian_arrays, p_element
from .errors import CausalityError, DomainError, EigensolverError, NumericalWarning
from .switching import SwitchingFamily, SwitchingSpec
from .utils import timed_profile

NEGATIVE_EIG_RTOL = 1e-14
CAUSAL_SLACK = 1e-12


class Method(str, enum.Enum):
    GENERIC = 'generic'
    TWO_DET = 'two-det'
    THREE_DET_TRIG = 'three-det-trig'
    FOUR_DET_FAMILY = 'four-det-family'


@dataclass(frozen=True, eq=False)
class DetectorSystem:
    """Identical pointlike detectors; indices 0..n_a-1 form A, the rest B."""
    positions: np.ndarray
    omega: float
    n_a: int
    spec: SwitchingSpec = SwitchingSpec()
    lam: float = 1.0
    allow_timelike: bool = False

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.positions, dtype=float))
        if pos.shape[1] > 3:
            raise DomainError(f'positions must have at most 3 coordinates, got {pos.shape[1]}')
        pos = np.pad(pos, ((0, 0), (0, 3 - pos.shape[1])))
        object.__setattr__(self, 'positions', pos)
        if pos.shape[0] < 2:
            raise DomainError('a detector system needs at least two detectors')
        if not 1 <= self.n_a <= pos.shape[0] - 1:
            raise DomainError(f'both subsystems must be non-empty, got n_a={self.n_a} of {pos.shape[0]}')
        if not np.all(np.isfinite(pos)):
            raise DomainError('positions must be finite')
        if not (np.isfinite(self.omega) and self.omega >= 0):
            raise DomainError(f'omega must be non-negative, got {self.omega}')
        if not self.lam > 0:
            raise DomainError(f'lam must be positive, got {self.lam}')

    @classmethod
    def from_labels(cls, positions, labels, omega: float, **kwargs) -> 'DetectorSystem':
        """Builds a system from per-detector 'A'/'B' labels, keeping relative order within each side."""
        labels = [str(lab).upper() for lab in labels]
        if set(labels) - {'A', 'B'}:
            raise DomainError(f'labels must be A or B, got {sorted(set(labels))}')
        pos = np.atleast_2d(np.asarray(positions, dtype=float))
        order = [n for n, lab in enumerate(labels) if lab == 'A'] + [n for n, lab in enumerate(labels) if lab == 'B']
        return cls(positions=pos[order], omega=omega, n_a=labels.count('A'), **kwargs)

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def n_b(self) -> int:
        return self.n - self.n_a

    @property
    def causal_length(self) -> float:
        return self.spec.causal_length

    @property
    def in_a(self) -> np.ndarray:
        return np.arange(self.n) < self.n_a

    def distances(self) -> np.ndarray:
        diff = self.positions[:, None, :] - self.positions[None, :, :]
        return np.sqrt(np.einsum('ijk,ijk->ij', diff, diff))

    def swapped(self) -> 'DetectorSystem':
        """The same detectors with the roles of A and B exchanged."""
        pos = np.concatenate([self.positions[self.n_a:], self.positions[:self.n_a]])
        return DetectorSystem(positions=pos, omega=self.omega, n_a=self.n_b, spec=self.spec,
                              lam=self.lam, allow_timelike=self.allow_timelike)


@dataclass(frozen=True, eq=False)
class ElementTable:
    """P plus C and X for every pair; entries that were not needed are NaN."""
    P: float
    C: np.ndarray
    X: np.ndarray
    n_a: int

    @property
    def n(self) -> int:
        return self.C.shape[0]

    def scaled(self, s: float) -> 'ElementTable':
        return ElementTable(P=s * self.P, C=s * self.C, X=s * self.X, n_a=self.n_a)

    def max_element(self) -> float:
        vals = np.concatenate([[abs(self.P)], np.abs(self.C[np.isfinite(self.C)]),
                               np.abs(self.X[np.isfinite(self.X)])])
        return float(vals.max())


@dataclass(frozen=True, eq=False)
class Rho1PT:
    matrix: np.ndarray
    order: tuple = ()

    def __post_init__(self):
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DomainError(f'rho1~ must be square, got shape {m.shape}')
        norm = np.abs(m).max(initial=0.0)
        if np.abs(m - m.conj().T).max(initial=0.0) > 1e-14 * norm:
            raise DomainError('rho1~ must be Hermitian')


@dataclass(frozen=True)
class NegativityResult:
    value: float
    negative_eigs: tuple
    method: Method
    eigenvalues: Optional[tuple] = field(default=None, compare=False)


def check_causality(sys: DetectorSystem, dist: Optional[np.ndarray] = None):
    if sys.allow_timelike:
        return
    dist = sys.distances() if dist is None else dist
    cross = sys.in_a[:, None] != sys.in_a[None, :]
    close = cross & (dist < sys.causal_length * (1.0 - CAUSAL_SLACK))
    if np.any(close):
        i, j = np.argwhere(close)[0]
        raise CausalityError(
            f'detectors {i + 1} and {j + 1} are {dist[i, j] / sys.causal_length:.6g} L apart, '
            'closer than L; set allow_timelike to override')


def element_table(sys: DetectorSystem, all_pairs: bool = False) -> ElementTable:
    """Elements needed for rho1~ (C within subsystems, X across), or every pair with all_pairs."""
    dist = sys.distances()
    check_causality(sys, dist)
    n = sys.n
    iu, ju = np.triu_indices(n, 1)
    same = sys.in_a[iu] == sys.in_a[ju]
    c = np.full((n, n), np.nan, dtype=complex)
    x = np.full((n, n), np.nan, dtype=complex)
    c_mask = np.ones_like(same) if all_pairs else same
    x_mask = np.ones_like(same) if all_pairs else ~same
    p = p_element(sys.lam, sys.omega, sys.spec)
    for mat, mask, kind in ((c, c_mask, 'C'), (x, x_mask, 'X')):
        if np.any(mask):
            vals = element_arrays(sys.omega, sys.spec, dist[iu[mask], ju[mask]], sys.lam, kind=kind)
            mat[iu[mask], ju[mask]] = vals
            mat[ju[mask], iu[mask]] = vals
    np.fill_diagonal(c, p)
    return ElementTable(P=p, C=c, X=x, n_a=sys.n_a)


def rho1_pt_from_table(table: ElementTable) -> Rho1PT:
    n, n_a = table.n, table.n_a
    m = np.zeros((n, n), dtype=complex)
    np.fill_diagonal(m, table.P)
    # j < i throughout; detector i sits later in the A-then-B ordering
    j, i = np.triu_indices(n, 1)
    both_a = i < n_a
    both_b = j >= n_a
    cross = ~(both_a | both_b)
    m[j[both_a], i[both_a]] = table.C[i[both_a], j[both_a]]
    m[i[both_a], j[both_a]] = np.conj(table.C[i[both_a], j[both_a]])
    m[i[both_b], j[both_b]] = table.C[i[both_b], j[both_b]]
    m[j[both_b], i[both_b]] = np.conj(table.C[i[both_b], j[both_b]])
    m[j[cross], i[cross]] = table.X[i[cross], j[cross]]
    m[i[cross], j[cross]] = np.conj(table.X[i[cross], j[cross]])
    order = np.arange(n)[::-1]
    return Rho1PT(matrix=m[np.ix_(order, order)], order=tuple(int(k) + 1 for k in order))


def assemble_rho1_pt(sys: DetectorSystem) -> Rho1PT:
    return rho1_pt_from_table(element_table(sys))


def negativity_from_eigs(eigs, method: Method, scale: Optional[float] = None) -> NegativityResult:
    eigs = np.sort(np.asarray(eigs, dtype=float))
    scale = np.abs(eigs).max(initial=0.0) if scale is None else scale
    neg = eigs[eigs < -NEGATIVE_EIG_RTOL * scale]
    return NegativityResult(value=float(-neg.sum()) if neg.size else 0.0,
                            negative_eigs=tuple(float(v) for v in neg),
                            method=method, eigenvalues=tuple(float(v) for v in eigs))


@timed_profile
def negativity_leading(block: Rho1PT) -> NegativityResult:
    """Sum of |negative eigenvalues| of rho1~ from a dense Hermitian eigensolve."""
    try:
        eigs = np.linalg.eigvalsh(block.matrix)
    except np.linalg.LinAlgError as e:
        raise EigensolverError(f'eigensolver failed on a {block.matrix.shape[0]}x{block.matrix.shape[0]} block') from e
    result = negativity_from_eigs(eigs, Method.GENERIC)
    logger.debug(f"{block.matrix.shape[0]}x{block.matrix.shape[0]} block: {len(result.negative_eigs)} negative eigenvalues")
    return result


def system_negativity(sys: DetectorSystem) -> NegativityResult:
    return negativity_leading(assemble_rho1_pt(sys))


def _require_gaussian(spec: SwitchingSpec):
    if spec.family is not SwitchingFamily.GAUSSIAN:
        raise DomainError('closed-form negativities need Gaussian switching')


def negativity_two_closed(x, omega, spec: SwitchingSpec = SwitchingSpec(), lam: float = 1.0):
    """max{0, |X+| - P} for a spacelike pair; broadcasts over x and omega."""
    _require_gaussian(spec)
    x = np.asarray(x, dtype=float)
    if np.any(x < spec.causal_length * (1.0 - CAUSAL_SLACK)):
        raise DomainError('the two-detector closed form needs x >= L')
    vals = gaussian_arrays(omega, x, spec.sigma, lam)
    out = np.maximum(0.0, np.abs(vals['Xp']) - vals['P'])
    return float(out) if out.ndim == 0 else out


def _trig_eigenvalues(p, c_x, x_r, x_l):
    s = np.sqrt(abs(c_x)**2 + abs(x_r)**2 + abs(x_l)**2)
    if s == 0:
        return s, 0.0, np.full(3, float(p))
    r = float(np.real(c_x * x_r * np.conj(x_l)))
    arg = 3.0 * np.sqrt(3.0) * r / s**3
    if abs(arg) > 1.0 + 1e-12:
        warnings.warn(f"trig cubic argument {arg:.15g} clamped to [-1, 1]", NumericalWarning)
    phi = np.arccos(np.clip(arg, -1.0, 1.0)) / 3.0
    rho = 2.0 * s / np.sqrt(3.0)
    return s, rho, p + rho * np.cos(phi + 2.0 * np.pi * np.arange(3) / 3.0)


def negativity_three_trig(P: float, C_x: complex, X_r: complex, X_L: complex) -> NegativityResult:
    """Three-detector negativity from the trigonometric solution of the block's cubic.

    The block is [[P, X_r*, X_L*], [X_r, P, C_x*], [X_L, C_x, P]]; its
    eigenvalues are P + y with y^3 - S^2 y - 2R = 0.
    """
    s, _, eigs = _trig_eigenvalues(P, C_x, X_r, X_L)
    if s == 0:
        return NegativityResult(value=0.0, negative_eigs=(), method=Method.THREE_DET_TRIG,
                                eigenvalues=tuple(eigs))
    return negativity_from_eigs(eigs, Method.THREE_DET_TRIG, scale=abs(P) + 2.0 * s)


def three_zero_criterion(P: float, C_x: complex, X_r: complex, X_L: complex) -> bool:
    """True when the three-detector negativity vanishes: |min_k cos(phi_k)| <= P/rho."""
    s, rho, eigs = _trig_eigenvalues(P, C_x, X_r, X_L)
    if s == 0:
        return True
    cos_min = np.min((eigs - P) / rho)
    return bool(cos_min >= 0 or abs(cos_min) <= P / rho)


class FourFamily(str, enum.Enum):
    AABB = 'aabb'
    ABBA = 'abba'
    ABAB = 'abab'
    RECTANGLE = 'rectangle'
    SKEWED_SQUARE = 'skewed-square'
    MOD_TETRAHEDRON = 'mod-tetrahedron'


FOUR_FAMILY_RANGE = {
    FourFamily.AABB: (0.0, np.inf),
    FourFamily.ABBA: (0.0, np.inf),
    FourFamily.ABAB: (1.0, np.inf),
    FourFamily.RECTANGLE: (0.0, np.inf),
    FourFamily.SKEWED_SQUARE: (0.0, np.sqrt(2.0)),
    FourFamily.MOD_TETRAHEDRON: (0.0, np.sqrt(2.0)),
}


def four_family_eigenvalues(family, x, omega, spec: SwitchingSpec = SwitchingSpec(), lam: float = 1.0):
    """Closed-form rho1~ eigenvalues of a symmetric four-detector family, with X -> X+.

    Returns an array with a trailing axis of length 4; x and omega broadcast.
    """
    family = FourFamily(family)
    _require_gaussian(spec)
    big_l = spec.causal_length
    x = np.asarray(x, dtype=float)
    lo, hi = FOUR_FAMILY_RANGE[family]
    ratio = x / big_l
    if np.any(ratio < lo - 1e-12) or np.any(ratio > hi + 1e-12):
        raise DomainError(f'{family.value} needs x/L in [{lo}, {hi}]')
    x, omega = np.broadcast_arrays(x, np.asarray(omega, dtype=float))

    def el(dist):
        vals = gaussian_arrays(omega, dist, spec.sigma, lam)
        return vals['C'], vals['Xp']

    p = gaussian_arrays(omega, big_l, spec.sigma, lam)['P']
    eigs = []
    if family is FourFamily.AABB:
        c_x, _ = el(x)
        _, x_l = el(big_l + 0.0 * x)
        _, x_1 = el(big_l + x)
        _, x_2 = el(big_l + 2.0 * x)
        for s in (1.0, -1.0):
            rad = 0.5 * np.sqrt((x_l - x_2)**2 + 4.0 * (c_x + s * x_1)**2)
            base = p + 0.5 * s * (x_l + x_2)
            eigs += [base + rad, base - rad]
    elif family is FourFamily.ABBA:
        c_x, _ = el(x)
        c_far, _ = el(2.0 * big_l + x)
        _, x_l = el(big_l + 0.0 * x)
        _, x_1 = el(big_l + x)
        for s in (1.0, -1.0):
            rad = 0.5 * np.sqrt((c_x - c_far)**2 + 4.0 * (x_1 + s * x_l)**2)
            base = p + 0.5 * s * (c_x + c_far)
            eigs += [base + rad, base - rad]
    elif family is FourFamily.ABAB:
        c_2x, _ = el(2.0 * x)
        _, x_1 = el(x)
        _, x_3 = el(3.0 * x)
        for s in (1.0, -1.0):
            rad = 0.5 * np.sqrt((x_3 - x_1)**2 + 4.0 * (c_2x + s * x_1)**2)
            base = p + 0.5 * s * (x_3 + x_1)
            eigs += [base + rad, base - rad]
    elif family is FourFamily.RECTANGLE:
        c_x, _ = el(x)
        _, x_l = el(big_l + 0.0 * x)
        _, x_d = el(np.hypot(big_l, x))
        for s in (1.0, -1.0):
            for r in (1.0, -1.0):
                eigs.append(p + s * c_x + r * (x_d + s * x_l))
    elif family is FourFamily.SKEWED_SQUARE:
        c_x, _ = el(x)
        c_y, _ = el(np.sqrt(np.clip(4.0 * big_l**2 - x**2, 0.0, None)))
        _, x_l = el(big_l + 0.0 * x)
        rad = 0.5 * np.sqrt((c_x - c_y)**2 + 16.0 * x_l**2)
        eigs += [p + 0.5 * (c_x + c_y) + rad, p + 0.5 * (c_x + c_y) - rad, p - c_x, p - c_y]
    else:
        c_x, _ = el(x)
        _, x_l = el(big_l + 0.0 * x)
        eigs += [p + c_x + 2.0 * x_l, p + c_x - 2.0 * x_l, p - c_x, p - c_x]
    return np.stack(eigs, axis=-1)


def negativity_four_family(family, x, omega, spec: SwitchingSpec = SwitchingSpec(), lam: float = 1.0):
    """Sum of max{0, -alpha} over the family's closed-form eigenvalues."""
    out = np.maximum(0.0, -four_family_eigenvalues(family, x, omega, spec, lam)).sum(axis=-1)
    return float(out) if out.ndim == 0 else out
