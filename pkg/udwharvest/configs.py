"""Named detector geometries in dimensionless parameters.

Lengths are given in units of L = 2T and angles in radians. Detector order
inside each built system is A first, then B, each in the order the family
numbers them.
"""
import enum
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.linalg import toeplitz

from .elements import element_arrays, p_element
from .errors import CausalityError, DomainError, SizeGuardError
from .negativity import DetectorSystem, Rho1PT
from .switching import SwitchingSpec

MAX_CHAIN = 200
SQRT2 = float(np.sqrt(2.0))


class GeometryKind(str, enum.Enum):
    PAIR = 'pair'
    TRIANGLE_POLAR = 'triangle-polar'
    TRIANGLE_CARTESIAN = 'triangle-cartesian'
    AAB = 'aab'
    ABA = 'aba'
    AABB = 'aabb'
    ABBA = 'abba'
    ABAB = 'abab'
    RECTANGLE = 'rectangle'
    SKEWED_SQUARE = 'skewed-square'
    MOD_TETRAHEDRON = 'mod-tetrahedron'
    DIAGONAL_SQUARE = 'diagonal-square'
    ASYM31 = 'asym31'
    CHAIN = 'chain'
    SCALED_OPTIMAL = 'scaled-optimal'

    @classmethod
    def parse(cls, name) -> 'GeometryKind':
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower().replace('_', '-'))
        except ValueError:
            raise DomainError(f'unknown geometry family {name!r}') from None


# (lower, upper) per free parameter
FAMILY_DOMAINS = {
    GeometryKind.PAIR: {'x_over_l': (0.0, np.inf)},
    GeometryKind.TRIANGLE_POLAR: {'r_over_l': (0.0, np.inf), 'theta': (0.0, np.pi)},
    GeometryKind.TRIANGLE_CARTESIAN: {'q1': (-np.inf, np.inf), 'q2': (-np.inf, np.inf)},
    GeometryKind.AAB: {'x_over_l': (0.0, np.inf)},
    GeometryKind.ABA: {'x_over_l': (0.0, np.inf)},
    GeometryKind.AABB: {'x_over_l': (0.0, np.inf)},
    GeometryKind.ABBA: {'x_over_l': (0.0, np.inf)},
    GeometryKind.ABAB: {'x_over_l': (0.0, np.inf)},
    GeometryKind.RECTANGLE: {'x_over_l': (0.0, np.inf)},
    GeometryKind.SKEWED_SQUARE: {'x_over_l': (0.0, SQRT2)},
    GeometryKind.MOD_TETRAHEDRON: {'x_over_l': (0.0, SQRT2)},
    GeometryKind.DIAGONAL_SQUARE: {},
    GeometryKind.ASYM31: {'theta21': (0.0, 2.0 * np.pi), 'theta32': (0.0, 2.0 * np.pi)},
    GeometryKind.CHAIN: {'n': (2, MAX_CHAIN)},
    GeometryKind.SCALED_OPTIMAL: {'l_over_l': (0.0, np.inf)},
}

# smallest value keeping every cross pair at least L apart; waived with allow_timelike
CAUSAL_MINIMUMS = {
    GeometryKind.PAIR: {'x_over_l': 1.0},
    GeometryKind.TRIANGLE_POLAR: {'r_over_l': 1.0},
    GeometryKind.ABA: {'x_over_l': 1.0},
    GeometryKind.ABAB: {'x_over_l': 1.0},
}

SCALED_BASES = {
    'pair': (GeometryKind.PAIR, {'x_over_l': 1.0}),
    'aba': (GeometryKind.ABA, {'x_over_l': 1.0}),
    'diagonal-square': (GeometryKind.DIAGONAL_SQUARE, {}),
    'asym31-equilateral': (GeometryKind.ASYM31, {'theta21': 2.0 * np.pi / 3.0, 'theta32': 2.0 * np.pi / 3.0}),
    'aabb': (GeometryKind.AABB, {'x_over_l': 0.08}),
}


@dataclass(frozen=True)
class GeometryFamily:
    kind: GeometryKind
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, 'kind', GeometryKind.parse(self.kind))
        object.__setattr__(self, 'params', dict(self.params))

    @classmethod
    def of(cls, kind, **params) -> 'GeometryFamily':
        return cls(kind, params)

    def with_params(self, **params) -> 'GeometryFamily':
        return GeometryFamily(self.kind, {**self.params, **params})


def free_parameters(kind) -> tuple:
    return tuple(FAMILY_DOMAINS[GeometryKind.parse(kind)])


def _param(family: GeometryFamily, name: str) -> float:
    try:
        val = family.params[name]
    except KeyError:
        raise DomainError(f'{family.kind.value} needs parameter {name!r}') from None
    lo, hi = FAMILY_DOMAINS[family.kind][name]
    if not np.isfinite(float(val)) or val < lo - 1e-12 or val > hi + 1e-12:
        raise DomainError(f'{family.kind.value}: {name}={val} outside [{lo}, {hi}]')
    return float(val)


def check_causal_minimums(family: GeometryFamily, allow_timelike: bool = False):
    """Reject parameters that put a cross pair closer than L unless allow_timelike.

    Call after the structural checks in _unit_positions have passed.
    """
    if allow_timelike:
        return
    kind = family.kind
    for name, lo in CAUSAL_MINIMUMS.get(kind, {}).items():
        val = float(family.params[name])
        if val < lo - 1e-12:
            raise CausalityError(f'{kind.value}: {name}={val} puts a cross pair closer than L; '
                                 'set allow_timelike to override')
    if kind is GeometryKind.TRIANGLE_CARTESIAN:
        q1, q2 = float(family.params['q1']), float(family.params['q2'])
        if np.hypot(q1, q2) < 1.0 - 1e-12:
            raise CausalityError(f'triangle-cartesian: (q1, q2)=({q1}, {q2}) closer than L to the B detector; '
                                 'set allow_timelike to override')


def _unit_positions(family: GeometryFamily):
    """Positions in units of L, plus n_a."""
    kind = family.kind
    if kind is GeometryKind.PAIR:
        x = _param(family, 'x_over_l')
        return [[0, 0, 0], [x, 0, 0]], 1
    if kind is GeometryKind.TRIANGLE_POLAR:
        r, theta = _param(family, 'r_over_l'), _param(family, 'theta')
        return [[1, 0, 0], [r * np.cos(theta), r * np.sin(theta), 0], [0, 0, 0]], 2
    if kind is GeometryKind.TRIANGLE_CARTESIAN:
        q1, q2 = _param(family, 'q1'), _param(family, 'q2')
        return [[1, 0, 0], [q1, q2, 0], [0, 0, 0]], 2
    if kind is GeometryKind.AAB:
        x = _param(family, 'x_over_l')
        return [[1, 0, 0], [1 + x, 0, 0], [0, 0, 0]], 2
    if kind is GeometryKind.ABA:
        x = _param(family, 'x_over_l')
        return [[-x, 0, 0], [x, 0, 0], [0, 0, 0]], 2
    if kind is GeometryKind.AABB:
        x = _param(family, 'x_over_l')
        return [[0, 0, 0], [x, 0, 0], [x + 1, 0, 0], [2 * x + 1, 0, 0]], 2
    if kind is GeometryKind.ABBA:
        x = _param(family, 'x_over_l')
        return [[0, 0, 0], [2 + x, 0, 0], [1 + x, 0, 0], [1, 0, 0]], 2
    if kind is GeometryKind.ABAB:
        x = _param(family, 'x_over_l')
        return [[0, 0, 0], [2 * x, 0, 0], [x, 0, 0], [3 * x, 0, 0]], 2
    if kind is GeometryKind.RECTANGLE:
        x = _param(family, 'x_over_l')
        return [[0, 0, 0], [0, x, 0], [1, x, 0], [1, 0, 0]], 2
    if kind in (GeometryKind.SKEWED_SQUARE, GeometryKind.DIAGONAL_SQUARE):
        x = SQRT2 if kind is GeometryKind.DIAGONAL_SQUARE else _param(family, 'x_over_l')
        h = np.sqrt(max(1.0 - 0.25 * x * x, 0.0))
        return [[0, 0.5 * x, 0], [0, -0.5 * x, 0], [h, 0, 0], [-h, 0, 0]], 2
    if kind is GeometryKind.MOD_TETRAHEDRON:
        x = _param(family, 'x_over_l')
        d = np.sqrt(max(1.0 - 0.5 * x * x, 0.0))
        return [[0, 0.5 * x, 0], [0, -0.5 * x, 0], [d, 0, 0.5 * x], [d, 0, -0.5 * x]], 2
    if kind is GeometryKind.ASYM31:
        t21, t32 = _param(family, 'theta21'), _param(family, 'theta32')
        if t21 + t32 > 2.0 * np.pi + 1e-12:
            raise DomainError(f'asym31: theta21 + theta32 = {t21 + t32} exceeds 2 pi')
        angles = np.array([0.0, t21, t21 + t32])
        pos = [[np.cos(a), np.sin(a), 0] for a in angles] + [[0, 0, 0]]
        return pos, 3
    if kind is GeometryKind.CHAIN:
        n = int(round(_param(family, 'n')))
        n_a = (n + 1) // 2
        pos = [[2 * (a - 1), 0, 0] for a in range(1, n_a + 1)]
        pos += [[2 * (b - n_a) - 1, 0, 0] for b in range(n_a + 1, n + 1)]
        return pos, n_a
    if kind is GeometryKind.SCALED_OPTIMAL:
        base = str(family.params.get('base', 'pair')).lower()
        if base not in SCALED_BASES:
            raise DomainError(f'scaled-optimal base must be one of {sorted(SCALED_BASES)}, got {base!r}')
        scale = _param(family, 'l_over_l')
        base_kind, base_params = SCALED_BASES[base]
        pos, n_a = _unit_positions(GeometryFamily(base_kind, base_params))
        return (scale * np.asarray(pos, dtype=float)).tolist(), n_a
    raise DomainError(f'no builder for {kind}')


def build(family: GeometryFamily, omega: float, spec: SwitchingSpec = SwitchingSpec(), lam: float = 1.0,
          allow_timelike: bool = False) -> DetectorSystem:
    """DetectorSystem for a named geometry at gap omega (1/time)."""
    pos, n_a = _unit_positions(family)
    check_causal_minimums(family, allow_timelike)
    positions = np.asarray(pos, dtype=float) * spec.causal_length
    return DetectorSystem(positions=positions, omega=omega, n_a=n_a, spec=spec, lam=lam,
                          allow_timelike=allow_timelike)


def build_dimensionless(family: GeometryFamily, omega_t: float, spec: SwitchingSpec = SwitchingSpec(),
                        lam: float = 1.0, allow_timelike: bool = False) -> DetectorSystem:
    return build(family, omega_t / spec.t_half, spec, lam, allow_timelike)


def asym31_chords(theta21: float, theta32: float) -> tuple:
    """A-A distances (x21, x32, x31) in units of L."""
    return (2.0 * np.sin(theta21 / 2.0), 2.0 * np.sin(theta32 / 2.0),
            2.0 * np.sin((2.0 * np.pi - theta21 - theta32) / 2.0))


@dataclass(frozen=True, eq=False)
class ChainStructure:
    """Which element fills each rho1~ entry of an N-detector alternating chain.

    kind is 'P', 'C' or 'X'; multiple is the separation in units of L;
    conjugate marks entries holding the complex conjugate.
    """
    kind: np.ndarray
    multiple: np.ndarray
    conjugate: np.ndarray

    def fill(self, p: complex, c_of, x_of) -> np.ndarray:
        n = self.kind.shape[0]
        out = np.empty((n, n), dtype=complex)
        for (r, c), kind in np.ndenumerate(self.kind):
            val = p if kind == 'P' else (c_of if kind == 'C' else x_of)(int(self.multiple[r, c]))
            out[r, c] = np.conj(val) if self.conjugate[r, c] else val
        return out


def _check_chain(n: int):
    if n < 2:
        raise DomainError(f'a chain needs at least two detectors, got {n}')
    if n > MAX_CHAIN:
        raise SizeGuardError(f'chain of {n} detectors exceeds {MAX_CHAIN}')


def chain_rho1_structure(n: int) -> ChainStructure:
    _check_chain(n)
    n_a = (n + 1) // 2
    dets = np.arange(n, 0, -1)
    kind = np.empty((n, n), dtype='<U1')
    multiple = np.zeros((n, n), dtype=int)
    conjugate = np.zeros((n, n), dtype=bool)
    for r, dr in enumerate(dets):
        for c, dc in enumerate(dets):
            a_r, a_c = dr <= n_a, dc <= n_a
            if r == c:
                kind[r, c] = 'P'
            elif a_r == a_c:
                kind[r, c] = 'C'
                multiple[r, c] = 2 * abs(dr - dc)
                conjugate[r, c] = dr > dc if a_r else dr < dc
            else:
                i, j = (dc, dr) if a_r else (dr, dc)
                k = max((i - n_a) - j + 1, j - (i - n_a))
                kind[r, c] = 'X'
                multiple[r, c] = 2 * k - 1
                conjugate[r, c] = not a_r
    return ChainStructure(kind=kind, multiple=multiple, conjugate=conjugate)


def chain_rho1_pt(n: int, omega: float, spec: SwitchingSpec = SwitchingSpec(), lam: float = 1.0) -> Rho1PT:
    """rho1~ of the alternating chain assembled from Toeplitz blocks.

    Only the distinct separations 2kL (C) and (2k-1)L (X) are evaluated.
    """
    _check_chain(n)
    n_a, n_b = (n + 1) // 2, n // 2
    parity = n % 2
    big_l = spec.causal_length
    p = p_element(lam, omega, spec)

    def c_values(count):
        vals = np.full(count, p, dtype=complex)
        if count > 1:
            vals[1:] = element_arrays(omega, spec, 2.0 * np.arange(1, count) * big_l, lam, kind='C')
        return vals

    c_a, c_b = c_values(n_a), c_values(n_b)
    steps = np.arange(parity - n_a + 1, parity + n_b)
    mults = np.unique(np.abs(2 * steps - 1))
    x_vals = element_arrays(omega, spec, mults * big_l, lam, kind='X')
    x_of = dict(zip(mults.tolist(), x_vals))
    col = np.array([x_of[abs(2 * (parity - q) - 1)] for q in range(n_a)])
    row = np.array([x_of[abs(2 * (parity + r) - 1)] for r in range(n_b)])
    x_block = toeplitz(col, row)
    aa = toeplitz(c_a, np.conj(c_a))
    bb = toeplitz(np.conj(c_b), c_b)
    mat = np.block([[bb, x_block.conj().T], [x_block, aa]])
    return Rho1PT(matrix=mat, order=tuple(range(n, 0, -1)))
