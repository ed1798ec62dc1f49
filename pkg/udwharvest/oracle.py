"""Brute-force check of the rho1~ reduction on the full 2^N x 2^N state.

Computational basis: detector 1 is the most significant bit, so the state
with detectors d_1..d_k excited has index sum(2^(N - d)). basis_index is the
single mapping from excitation sets to matrix indices; assembly, the partial
transpose and the block ordering all go through it.
"""
import itertools
from dataclasses import dataclass, field

import numpy as np
from loguru import logger

from .errors import EigensolverError, SizeGuardError
from .negativity import (DetectorSystem, ElementTable, NEGATIVE_EIG_RTOL, element_table,
                         rho1_pt_from_table)
from .switching import SwitchingSpec

MAX_DETECTORS = 14
MAX_PRODUCT_DETECTORS = 12
SUBMATRIX_BOUND_FACTOR = 10.0


def basis_index(excited, n: int) -> int:
    """Computational-basis index of the state with the given detectors (1-based) excited."""
    return sum(1 << (n - d) for d in excited)


def block_order(n: int) -> np.ndarray:
    """One-excitation states, the vacuum, two-excitation states, then the rest, binary order within each."""
    weights = np.array([bin(k).count('1') for k in range(1 << n)])
    idx = np.arange(1 << n)
    rest = idx[weights > 2]
    return np.concatenate([idx[weights == 1], [0], idx[weights == 2], rest])


@dataclass(frozen=True, eq=False)
class FullState:
    """Leading-order state rho1 (+) rho2, stored in the block ordering."""
    matrix: np.ndarray
    n: int
    n_a: int
    order: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.order is None:
            object.__setattr__(self, 'order', block_order(self.n))

    def computational(self) -> np.ndarray:
        out = np.empty_like(self.matrix)
        out[np.ix_(self.order, self.order)] = self.matrix
        return out

    @classmethod
    def from_computational(cls, mat: np.ndarray, n: int, n_a: int) -> 'FullState':
        order = block_order(n)
        return cls(matrix=mat[np.ix_(order, order)], n=n, n_a=n_a, order=order)

    @property
    def vacuum_weight(self) -> float:
        return float(self.matrix[self.n, self.n].real)


def _guard(n: int, limit: int = MAX_DETECTORS):
    if n > limit:
        raise SizeGuardError(f'{n} detectors exceed the dense limit of {limit}')


def assemble_full_from_table(table: ElementTable) -> FullState:
    n, n_a = table.n, table.n_a
    _guard(n)
    rho = np.zeros((1 << n, 1 << n), dtype=complex)
    rho[0, 0] = 1.0 - n * table.P
    for d in range(1, n + 1):
        e = basis_index((d,), n)
        rho[e, e] = table.P
    for j, i in itertools.combinations(range(1, n + 1), 2):
        # j < i: one-excitation coherence C_ij and vacuum/double coherence X_ij
        c = table.C[i - 1, j - 1]
        x = table.X[i - 1, j - 1]
        ej, ei, eij = basis_index((j,), n), basis_index((i,), n), basis_index((j, i), n)
        rho[ej, ei] = c
        rho[ei, ej] = np.conj(c)
        rho[eij, 0] = x
        rho[0, eij] = np.conj(x)
    return FullState.from_computational(rho, n, n_a)


def assemble_full(sys: DetectorSystem) -> FullState:
    """Full leading-order state; needs every pair's C and X, so N <= 14."""
    _guard(sys.n)
    return assemble_full_from_table(element_table(sys, all_pairs=True))


def _transpose_b(mat: np.ndarray, n: int, n_a: int) -> np.ndarray:
    # axes 0..n-1 are ket factors of detectors 1..n, n..2n-1 the bra factors
    tensor = mat.reshape((2,) * (2 * n))
    perm = list(range(2 * n))
    for d in range(n_a, n):
        perm[d], perm[n + d] = n + d, d
    return tensor.transpose(perm).reshape(1 << n, 1 << n)


def partial_transpose_B(state: FullState, sys=None) -> np.ndarray:
    """Partial transpose over subsystem B, returned in the block ordering."""
    n_a = state.n_a if sys is None else sys.n_a
    pt = _transpose_b(state.computational(), state.n, n_a)
    return pt[np.ix_(state.order, state.order)]


def _eigvalsh(mat: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.eigvalsh(mat)
    except np.linalg.LinAlgError as e:
        raise EigensolverError(f'eigensolver failed on a {mat.shape[0]}x{mat.shape[0]} matrix') from e


def negativity_full(pt: np.ndarray) -> float:
    eigs = _eigvalsh(pt)
    neg = eigs[eigs < -NEGATIVE_EIG_RTOL * np.abs(eigs).max(initial=0.0)]
    return float(-neg.sum())


def rho2_pt_eigenvalues(pt: np.ndarray, n: int) -> np.ndarray:
    """Spectrum of the vacuum/two-excitation sector of a block-ordered partial transpose."""
    sector = slice(n, n + 1 + n * (n - 1) // 2)
    return _eigvalsh(pt[sector, sector])


def submatrix_bound(table: ElementTable) -> float:
    """Bound on |N_full - N_sub|: |y|^2 / rho00 with |y|^2 <= n_pairs * max^2."""
    n_pairs = table.n * (table.n - 1) // 2
    rho00 = 1.0 - table.n * table.P
    return max(SUBMATRIX_BOUND_FACTOR, n_pairs) * table.max_element()**2 / rho00


@dataclass(frozen=True)
class AdditivityReport:
    total: float
    product_identity: float
    leading_sum: float
    identity_residual: float
    leading_residual: float


def additivity_check(systems, tables=None) -> AdditivityReport:
    """Negativity of a tensor product of full states against the exact product identity and the leading-order sum."""
    if tables is None:
        tables = [element_table(sys, all_pairs=True) for sys in systems]
    n_total = sum(t.n for t in tables)
    if n_total > MAX_PRODUCT_DETECTORS:
        raise SizeGuardError(f'{n_total} detectors in the product exceed {MAX_PRODUCT_DETECTORS}')
    pts, parts, leading = [], [], []
    for table in tables:
        state = assemble_full_from_table(table)
        pt = _transpose_b(state.computational(), state.n, state.n_a)
        pts.append(pt)
        parts.append(negativity_full(pt))
        leading.append(_sub_negativity(table))
    product = pts[0]
    for pt in pts[1:]:
        product = np.kron(product, pt)
    total = negativity_full(product)
    identity = 0.5 * (np.prod([2.0 * v + 1.0 for v in parts]) - 1.0)
    lead = float(sum(leading))
    scale = max(abs(identity), np.finfo(float).tiny)
    return AdditivityReport(total=total, product_identity=float(identity), leading_sum=lead,
                            identity_residual=abs(total - identity) / scale,
                            leading_residual=abs(total - lead))


def _sub_negativity(table: ElementTable) -> float:
    block = rho1_pt_from_table(table)
    eigs = _eigvalsh(block.matrix)
    neg = eigs[eigs < -NEGATIVE_EIG_RTOL * np.abs(eigs).max(initial=0.0)]
    return float(-neg.sum())


@dataclass(frozen=True)
class OracleTrial:
    trial: int
    n: int
    n_a: int
    sub: float
    full: float
    residual: float
    bound: float
    exponent: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.bound and abs(self.exponent - 2.0) <= 0.1


def compare_table(table: ElementTable, scales=(1.0, 0.5, 0.25)):
    """N_sub, N_full and the power-law exponent of |N_full - N_sub| under element scaling."""
    residuals, sub, full = [], None, None
    for s in scales:
        scaled = table.scaled(s)
        state = assemble_full_from_table(scaled)
        n_full = negativity_full(partial_transpose_B(state))
        n_sub = _sub_negativity(scaled)
        if sub is None:
            sub, full = n_sub, n_full
        residuals.append(abs(n_full - n_sub))
    exponent = float(np.polyfit(np.log(scales), np.log(residuals), 1)[0])
    return sub, full, exponent


def random_system(rng: np.random.Generator, n: int, omega_t: float = 20.0, spec=None,
                  box: float = None, min_same: float = 0.5) -> DetectorSystem:
    """Random planar system with cross pairs at >= L and same-side pairs at >= min_same L."""
    spec = SwitchingSpec() if spec is None else spec
    box = 1.0 + n if box is None else box
    big_l = spec.causal_length
    n_a = int(rng.integers(1, n))
    for _ in range(10000):
        pos = rng.uniform(0.0, box * big_l, size=(n, 2))
        sys = DetectorSystem(positions=pos, omega=omega_t / spec.t_half, n_a=n_a, spec=spec)
        dist = sys.distances() / big_l
        cross = sys.in_a[:, None] != sys.in_a[None, :]
        off = ~np.eye(n, dtype=bool)
        if np.all(dist[cross] >= 1.0) and np.all(dist[off & ~cross] >= min_same):
            return sys
    raise SizeGuardError(f'could not place {n} detectors in a {box} L box')


def normalized_table(sys: DetectorSystem, target: float = 1e-3) -> ElementTable:
    """Element table rescaled (a change of lambda^2) so its largest entry is `target`."""
    table = element_table(sys, all_pairs=True)
    return table.scaled(target / table.max_element())


def oracle_check(n: int, trials: int, seed: int = 0, omega_t: float = 20.0, spec=None):
    """Random-system comparisons of the full and reduced negativities."""
    _guard(n)
    rng = np.random.default_rng(seed)
    results = []
    for trial in range(trials):
        sys = random_system(rng, n, omega_t=omega_t, spec=spec)
        table = normalized_table(sys)
        sub, full, exponent = compare_table(table)
        res = OracleTrial(trial=trial, n=n, n_a=sys.n_a, sub=sub, full=full, residual=abs(full - sub),
                          bound=submatrix_bound(table), exponent=exponent)
        logger.debug(f"oracle trial {trial}: residual={res.residual:.3g} bound={res.bound:.3g} "
                     f"exponent={exponent:.4f}")
        results.append(res)
    return results
