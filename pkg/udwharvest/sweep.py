"""Parameter sweeps, local optimization and the scans built on them.

Tables are pandas DataFrames in row-major order over the grid axes, the first
axis outermost. A point that fails with a HarvestError keeps its row, with
NaN results and the exception class name in the status column.
"""
import functools
import itertools
import multiprocessing as mp
import sys
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import pandas as pd
from concurrent.futures import ProcessPoolExecutor
from loguru import logger
from scipy import ndimage
from scipy import optimize as so

from . import configs
from .configs import CAUSAL_MINIMUMS, FAMILY_DOMAINS, SCALED_BASES, GeometryFamily, GeometryKind, free_parameters
from .elements import ElementParams, commutator_ratios, gaussian_elements, p_element, quadrature_elements
from .errors import CausalityError, DomainError, HarvestError, NumericalWarning, SizeGuardError
from .negativity import NegativityResult, negativity_leading, system_negativity
from .switching import SwitchingFamily, SwitchingSpec
from .utils import spool_profiles, timed_profile

OK = 'ok'
OMEGA = 'omega_t'
XATOL = 1e-4
WINDOW_XATOL = 1e-5
FATOL = 1e-10
MAX_REFINE_ITER = 4000
FIT_OMEGAS = (18.88, 24.49)
SCALE_OMEGA_T = 24.49
COMPARE_FAMILIES = ('pair', 'aba', 'diagonal-square')
WORKER_LOG_LEVEL = 'WARNING'

DEFAULT_BOXES = {
    GeometryKind.PAIR: {'x_over_l': (1.0, 3.0)},
    GeometryKind.TRIANGLE_POLAR: {'r_over_l': (1.0, 3.0), 'theta': (0.0, np.pi)},
    GeometryKind.TRIANGLE_CARTESIAN: {'q1': (-3.0, 3.0), 'q2': (0.0, 3.0)},
    GeometryKind.AAB: {'x_over_l': (0.0, 1.0)},
    GeometryKind.ABA: {'x_over_l': (1.0, 3.0)},
    GeometryKind.AABB: {'x_over_l': (0.0, 1.0)},
    GeometryKind.ABBA: {'x_over_l': (0.0, 1.0)},
    GeometryKind.ABAB: {'x_over_l': (1.0, 3.0)},
    GeometryKind.RECTANGLE: {'x_over_l': (0.0, 10.0)},
    GeometryKind.SKEWED_SQUARE: {'x_over_l': (0.0, configs.SQRT2)},
    GeometryKind.MOD_TETRAHEDRON: {'x_over_l': (0.0, configs.SQRT2)},
    GeometryKind.DIAGONAL_SQUARE: {},
    GeometryKind.ASYM31: {'theta21': (np.pi / 3.0, np.pi), 'theta32': (np.pi / 3.0, np.pi)},
    GeometryKind.SCALED_OPTIMAL: {'l_over_l': (1.0, 5.0)},
}
DEFAULT_OMEGA_BOX = (0.0, 35.0)


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    num: int

    def __post_init__(self):
        if not (np.isfinite(self.start) and np.isfinite(self.stop)):
            raise DomainError(f'axis {self.name}: range must be finite')
        if int(self.num) != self.num or self.num < 1:
            raise DomainError(f'axis {self.name}: num must be a positive integer, got {self.num}')
        if self.stop < self.start:
            raise DomainError(f'axis {self.name}: stop {self.stop} is below start {self.start}')
        object.__setattr__(self, 'num', int(self.num))

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.num)

    @property
    def step(self) -> float:
        return (self.stop - self.start) / (self.num - 1) if self.num > 1 else 0.0


def _check_range(kind: GeometryKind, name: str, lo: float, hi: float, allow_timelike: bool = False):
    if name == OMEGA:
        dom = (0.0, np.inf)
    else:
        dom = FAMILY_DOMAINS[kind][name]
    if lo < dom[0] - 1e-12 or hi > dom[1] + 1e-12:
        raise DomainError(f'{kind.value}: {name} range [{lo}, {hi}] leaves the domain [{dom[0]}, {dom[1]}]')
    causal = CAUSAL_MINIMUMS.get(kind, {}).get(name)
    if causal is not None and not allow_timelike and lo < causal - 1e-12:
        raise CausalityError(f'{kind.value}: {name} range starts at {lo}, below the causal minimum {causal}; '
                             'set allow_timelike to override')


@dataclass(frozen=True)
class SweepPlan:
    """A dense grid over some of a family's parameters and, optionally, omega_t."""
    family: GeometryFamily
    axes: tuple
    spec: SwitchingSpec = SwitchingSpec()
    lam: float = 1.0
    omega_t: Optional[float] = None
    refine: bool = False
    output: Optional[str] = None
    workers: int = 1
    allow_timelike: bool = False

    def __post_init__(self):
        axes = tuple(a if isinstance(a, Axis) else Axis(**a) for a in self.axes)
        object.__setattr__(self, 'axes', axes)
        kind = self.family.kind
        names = [a.name for a in axes]
        if len(set(names)) != len(names):
            raise DomainError(f'duplicate sweep axes {names}')
        allowed = free_parameters(kind) + (OMEGA,)
        unknown = [n for n in names if n not in allowed]
        if unknown:
            raise DomainError(f'{kind.value} has no parameter(s) {unknown}; choose from {list(allowed)}')
        if OMEGA not in names and self.omega_t is None:
            raise DomainError('omega_t must be a sweep axis or fixed')
        missing = [p for p in free_parameters(kind) if p not in names and p not in self.family.params]
        if missing:
            raise DomainError(f'{kind.value}: parameter(s) {missing} neither swept nor fixed')
        for a in axes:
            _check_range(kind, a.name, a.start, a.stop, self.allow_timelike)
        if self.workers < 1:
            raise DomainError(f'workers must be at least 1, got {self.workers}')

    @property
    def names(self) -> tuple:
        return tuple(a.name for a in self.axes)

    @property
    def shape(self) -> tuple:
        return tuple(a.num for a in self.axes)

    @property
    def columns(self) -> tuple:
        return free_parameters(self.family.kind) + (OMEGA,)

    def points(self) -> list:
        return list(itertools.product(*[a.values() for a in self.axes]))


@dataclass(frozen=True)
class OptimumReport:
    family: str
    params: dict
    value: float
    iterations: int
    converged: bool
    grid_value: float = float('nan')

    def to_row(self) -> dict:
        return {'family': self.family, **self.params, 'negativity': self.value,
                'grid_negativity': self.grid_value, 'iterations': self.iterations,
                'converged': self.converged}


@dataclass(frozen=True, eq=False)
class ChainScan:
    table: pd.DataFrame
    curves: pd.DataFrame
    fits: dict = field(default_factory=dict)

    def fit_summary(self) -> str:
        return '; '.join(f'slope at omega_t={w:g}: {s:.6g} (intercept {c:.6g})'
                         for w, (s, c) in sorted(self.fits.items()))


def _init_worker(level: str = WORKER_LOG_LEVEL):
    logger.remove()
    logger.add(sys.stderr, level=level)


def _map_blocks(func, blocks, workers: int) -> list:
    """func over blocks, in block order; a spawn process pool when workers > 1."""
    workers = min(int(workers), len(blocks))
    if workers <= 1:
        return [func(b) for b in blocks]
    ctx = mp.get_context('spawn')
    with ProcessPoolExecutor(max_workers=workers, mp_context=ctx, initializer=_init_worker) as executor:
        return list(executor.map(func, blocks))


@timed_profile
def evaluate_point(family: GeometryFamily, omega_t: float, spec: SwitchingSpec = SwitchingSpec(),
                   lam: float = 1.0, allow_timelike: bool = False) -> NegativityResult:
    """Leading-order negativity of one geometry at dimensionless gap omega_t."""
    if family.kind is GeometryKind.CHAIN:
        if 'n' not in family.params:
            raise DomainError("chain needs parameter 'n'")
        n = int(round(float(family.params['n'])))
        return negativity_leading(configs.chain_rho1_pt(n, omega_t / spec.t_half, spec, lam))
    return system_negativity(configs.build_dimensionless(family, omega_t, spec, lam, allow_timelike))


def _point_row(plan: SweepPlan, point) -> dict:
    values = dict(zip(plan.names, (float(v) for v in point)))
    omega_t = values.pop(OMEGA, plan.omega_t)
    family = plan.family.with_params(**values)
    row = {name: family.params.get(name, np.nan) for name in free_parameters(family.kind)}
    row[OMEGA] = omega_t
    try:
        res = evaluate_point(family, omega_t, plan.spec, plan.lam, plan.allow_timelike)
        row.update(negativity=res.value, n_negative=len(res.negative_eigs), status=OK)
    except HarvestError as e:
        logger.debug(f"{family.kind.value} at {row}: {e}")
        row.update(negativity=np.nan, n_negative=0, status=type(e).__name__)
    return row


def _sweep_block(plan: SweepPlan, points) -> list:
    try:
        return [_point_row(plan, p) for p in points]
    finally:
        spool_profiles()


def _blocks(points: list, row_len: int) -> list:
    return [points[k:k + row_len] for k in range(0, len(points), row_len)]


def run_sweep(plan: SweepPlan) -> pd.DataFrame:
    """Dense grid evaluation; one row per grid point."""
    points = plan.points()
    if len(plan.axes) > 1:
        row_len = plan.shape[-1]
    else:
        row_len = max(1, -(-len(points) // (4 * plan.workers)))
    blocks = _blocks(points, row_len)
    logger.info(f"sweeping {plan.family.kind.value} over {len(points)} points "
                f"({len(blocks)} blocks, {min(plan.workers, len(blocks))} worker(s))")
    rows = _map_blocks(functools.partial(_sweep_block, plan), blocks, plan.workers)
    table = pd.DataFrame([r for block in rows for r in block],
                         columns=list(plan.columns) + ['negativity', 'n_negative', 'status'])
    failed = int((table['status'] != OK).sum())
    if failed:
        logger.warning(f"{failed} of {len(table)} points failed")
    if table['negativity'].notna().any():
        logger.info(f"sweep done: max negativity {table['negativity'].max():.6g}")
    return table


def _objective(vec, family, names, omega_t, spec, lam, allow_timelike, scale):
    values = dict(zip(names, (float(v) for v in vec)))
    omega = values.pop(OMEGA, omega_t)
    try:
        val = evaluate_point(family.with_params(**values), omega, spec, lam, allow_timelike).value
    except HarvestError:
        return 0.0
    return -val / scale


def refine(family: GeometryFamily, start: dict, box: dict, omega_t: Optional[float] = None,
           spec: SwitchingSpec = SwitchingSpec(), lam: float = 1.0, allow_timelike: bool = False,
           steps: Optional[dict] = None) -> OptimumReport:
    """Bounded Nelder-Mead from `start` inside `box`; returns the best point seen."""
    names = tuple(box)
    x0 = np.array([float(start[n]) for n in names])
    lo = np.array([box[n][0] for n in names], dtype=float)
    hi = np.array([box[n][1] for n in names], dtype=float)
    args = (family, names, omega_t, spec, lam, allow_timelike)
    start_value = -_objective(x0, *args, 1.0)
    fixed = {} if OMEGA in names else {OMEGA: omega_t}
    if not names:
        return OptimumReport(family.kind.value, {**fixed}, start_value, 0, True, start_value)
    scale = start_value if start_value > 0 else 1.0
    steps = steps or {}
    simplex = [x0.copy()]
    for k, n in enumerate(names):
        step = steps.get(n) or 0.05 * (hi[k] - lo[k])
        vert = x0.copy()
        vert[k] = x0[k] + step if x0[k] + step <= hi[k] else x0[k] - step
        simplex.append(np.clip(vert, lo, hi))
    res = so.minimize(_objective, x0, args=args + (scale,), method='Nelder-Mead',
                      bounds=list(zip(lo, hi)),
                      options=dict(initial_simplex=np.array(simplex), xatol=XATOL, fatol=FATOL,
                                   maxiter=MAX_REFINE_ITER, return_all=True))
    value = -res.fun * scale
    best = np.clip(res.x, lo, hi)
    if value < start_value:
        value, best = start_value, x0
    if not res.success:
        logger.warning(f"{family.kind.value}: refinement did not converge: {res.message}")
        warnings.warn(f"{family.kind.value} refinement stopped before convergence; best so far returned",
                      NumericalWarning)
    params = {**{n: float(v) for n, v in zip(names, best)}, **fixed}
    logger.info(f"{family.kind.value} optimum {params} -> {value:.6g} after {res.nit} iterations")
    return OptimumReport(family.kind.value, params, float(value), len(res.allvecs), bool(res.success),
                         start_value)


def default_box(kind) -> dict:
    kind = GeometryKind.parse(kind)
    if kind not in DEFAULT_BOXES:
        raise DomainError(f'no default search box for {kind.value}')
    return {**DEFAULT_BOXES[kind], OMEGA: DEFAULT_OMEGA_BOX}


def optimize(family: GeometryFamily, box: Optional[dict] = None, omega_t: Optional[float] = None,
             spec: SwitchingSpec = SwitchingSpec(), lam: float = 1.0, grid: int = 9, workers: int = 1,
             allow_timelike: bool = False) -> OptimumReport:
    """Coarse grid scan over `box`, then bounded Nelder-Mead from the best grid point.

    box maps parameter names (family parameters and omega_t) to (lo, hi);
    zero-width entries are held fixed. At most three parameters may vary.
    """
    if family.kind is GeometryKind.CHAIN:
        raise DomainError('chains are scanned with chain_scan, not optimized')
    box = default_box(family.kind) if box is None else dict(box)
    box = {n: (float(lo), float(hi)) for n, (lo, hi) in box.items()}
    free = {n: b for n, b in box.items() if b[1] > b[0]}
    for n, (lo, _) in box.items():
        if n not in free:
            if n == OMEGA:
                omega_t = lo
            else:
                family = family.with_params(**{n: lo})
    if len(free) > 3:
        raise DomainError(f'at most three free parameters, got {list(free)}')
    axes = tuple(Axis(n, lo, hi, grid) for n, (lo, hi) in free.items())
    if not axes:
        value = evaluate_point(family, omega_t, spec, lam, allow_timelike).value
        params = {OMEGA: omega_t}
        return OptimumReport(family.kind.value, params, value, 0, True, value)
    plan = SweepPlan(family=family, axes=axes, spec=spec, lam=lam, omega_t=omega_t, workers=workers,
                     allow_timelike=allow_timelike)
    table = run_sweep(plan)
    ok = table[table['status'] == OK]
    if ok.empty:
        raise DomainError(f'{family.kind.value}: no grid point in {box} could be evaluated')
    best = ok.loc[ok['negativity'].idxmax()]
    report = refine(family, {n: best[n] for n in free}, free, omega_t, spec, lam, allow_timelike,
                    steps={a.name: a.step for a in axes})
    return replace(report, grid_value=float(best['negativity']))


def find_local_maxima(table: pd.DataFrame, plan: SweepPlan) -> pd.DataFrame:
    """Grid points strictly above all their neighbours (8 in 2D) with positive negativity."""
    vals = table['negativity'].to_numpy(dtype=float).reshape(plan.shape)
    vals = np.where(np.isfinite(vals), vals, -np.inf)
    footprint = np.ones((3,) * vals.ndim, dtype=bool)
    footprint[(1,) * vals.ndim] = False
    neigh = ndimage.maximum_filter(vals, footprint=footprint, mode='constant', cval=-np.inf)
    idx = np.flatnonzero(((vals > neigh) & (vals > 0)).ravel())
    return table.iloc[idx].sort_values('negativity', ascending=False, kind='stable').reset_index(drop=True)


def refine_sweep(plan: SweepPlan, table: pd.DataFrame, max_starts: int = 5) -> list:
    """Nelder-Mead from each grid local maximum, inside one grid step around it."""
    reports = []
    for _, peak in find_local_maxima(table, plan).head(max_starts).iterrows():
        box = {a.name: (max(a.start, peak[a.name] - a.step), min(a.stop, peak[a.name] + a.step))
               for a in plan.axes if a.num > 1}
        fixed = {a.name: float(peak[a.name]) for a in plan.axes if a.num == 1}
        omega_t = fixed.pop(OMEGA, plan.omega_t)
        family = plan.family.with_params(**fixed)
        report = refine(family, {n: peak[n] for n in box}, box, omega_t, plan.spec, plan.lam,
                        plan.allow_timelike, steps={a.name: a.step for a in plan.axes})
        reports.append(replace(report, grid_value=float(peak['negativity'])))
    return reports


def _chain_row(n: int, omega_grid, spec: SwitchingSpec, lam: float, fit_omegas) -> tuple:
    family = GeometryFamily.of('chain', n=n)
    row = {'n': n}
    curve = np.full(len(omega_grid), np.nan)
    try:
        def neg(w):
            return evaluate_point(family, float(w), spec, lam).value

        curve = np.array([neg(w) for w in omega_grid])
        k = int(np.argmax(curve))
        best_w, best_v = float(omega_grid[k]), float(curve[k])
        lo, hi = omega_grid[max(k - 1, 0)], omega_grid[min(k + 1, len(omega_grid) - 1)]
        if best_v > 0 and hi > lo:
            res = so.minimize_scalar(lambda w: -neg(w), bounds=(lo, hi), method='bounded',
                                     options={'xatol': XATOL})
            if -res.fun >= best_v:
                best_w, best_v = float(res.x), float(-res.fun)
        row.update(omega_t_opt=best_w, negativity_opt=best_v)
        for w in fit_omegas:
            row[f'negativity_at_{w:g}'] = neg(w)
        row['status'] = OK
    except HarvestError as e:
        logger.debug(f"chain n={n}: {e}")
        row.update(omega_t_opt=np.nan, negativity_opt=np.nan,
                   **{f'negativity_at_{w:g}': np.nan for w in fit_omegas}, status=type(e).__name__)
    finally:
        spool_profiles()
    return row, curve


def chain_scan(max_n: int, omega_grid, spec: SwitchingSpec = SwitchingSpec(), lam: float = 1.0,
               fit_omegas=FIT_OMEGAS, fit_min_n: int = 2, workers: int = 1) -> ChainScan:
    """Negativity of alternating chains N = 2..max_n over omega_grid, with linear fits in N."""
    if max_n > configs.MAX_CHAIN:
        raise SizeGuardError(f"chain of {max_n} detectors exceeds {configs.MAX_CHAIN}")
    if max_n < 2:
        raise DomainError(f'max_n must be at least 2, got {max_n}')
    omega_grid = np.asarray(omega_grid, dtype=float)
    ns = list(range(2, max_n + 1))
    logger.info(f"chain scan N=2..{max_n} over {omega_grid.size} gaps")
    func = functools.partial(_chain_row, omega_grid=omega_grid, spec=spec, lam=lam, fit_omegas=tuple(fit_omegas))
    results = _map_blocks(func, ns, workers)
    table = pd.DataFrame([r for r, _ in results])
    curves = pd.DataFrame([{'n': n, OMEGA: w, 'negativity': v}
                           for n, (_, curve) in zip(ns, results) for w, v in zip(omega_grid, curve)])
    fits = {}
    usable = table[(table['status'] == OK) & (table['n'] >= fit_min_n)]
    for w in fit_omegas:
        if len(usable) >= 2:
            slope, intercept = np.polyfit(usable['n'].to_numpy(float), usable[f'negativity_at_{w:g}'].to_numpy(float), 1)
            fits[float(w)] = (float(slope), float(intercept))
    scan = ChainScan(table=table, curves=curves, fits=fits)
    if fits:
        logger.info(scan.fit_summary())
    return scan


def scale_scan(l_axis: Axis, bases=tuple(SCALED_BASES), omega_t: float = SCALE_OMEGA_T,
               spec: SwitchingSpec = SwitchingSpec(), lam: float = 1.0, workers: int = 1) -> pd.DataFrame:
    """Negativity of the optimal configurations scaled so their A-B distance is l."""
    if l_axis.name != 'l_over_l':
        raise DomainError(f"scale scans run over l_over_l, got axis {l_axis.name!r}")
    frames = []
    for base in bases:
        if base not in SCALED_BASES:
            raise DomainError(f'unknown scaled configuration {base!r}; choose from {sorted(SCALED_BASES)}')
        plan = SweepPlan(family=GeometryFamily.of('scaled-optimal', base=base), axes=(l_axis,),
                         spec=spec, lam=lam, omega_t=omega_t, workers=workers)
        table = run_sweep(plan)
        table.insert(0, 'base', base)
        frames.append(table)
    out = pd.concat(frames, ignore_index=True)
    with np.errstate(divide='ignore', invalid='ignore'):
        log = np.log10(out['negativity'].to_numpy(dtype=float))
    out.insert(out.columns.get_loc('negativity') + 1, 'log10_negativity', log)
    return out


def harvesting_extent(table: pd.DataFrame) -> dict:
    """Largest l/L at which each scaled configuration still harvests (NaN when it never does)."""
    out = {}
    for base, group in table.groupby('base', sort=False):
        positive = group[group['negativity'] > 0]
        out[base] = float(positive['l_over_l'].max()) if not positive.empty else float('nan')
    return out


def switching_label(spec: SwitchingSpec) -> str:
    if spec.family is SwitchingFamily.POLYNOMIAL:
        return f'{spec.family.value}(delta={spec.delta:g})'
    return spec.family.value


def harvest_margin(family: GeometryFamily, omega_t: float, spec: SwitchingSpec = SwitchingSpec(),
                   lam: float = 1.0, allow_timelike: bool = False):
    """Negativity and -min(eig)/P of rho1~.

    The margin is continuous in omega_t and positive where the system
    harvests; for a pair it is (|X| - P)/P.
    """
    res = evaluate_point(family, omega_t, spec, lam, allow_timelike)
    p = p_element(lam, omega_t / spec.t_half, spec)
    return res, float(-res.eigenvalues[0] / p)


def _compare_row(family: GeometryFamily, spec: SwitchingSpec, lam: float, point) -> dict:
    omega_t = float(point[0])
    row = {OMEGA: omega_t}
    try:
        res, margin = harvest_margin(family, omega_t, spec, lam)
        row.update(negativity=res.value, margin=margin, status=OK)
    except HarvestError as e:
        logger.debug(f"{family.kind.value} at omega_t={omega_t:g}: {e}")
        row.update(negativity=np.nan, margin=np.nan, status=type(e).__name__)
    return row


def _compare_block(points, family: GeometryFamily, spec: SwitchingSpec, lam: float) -> list:
    try:
        return [_compare_row(family, spec, lam, p) for p in points]
    finally:
        spool_profiles()


def _negative_margin(omega_t, family, spec, lam):
    try:
        return -harvest_margin(family, float(omega_t), spec, lam)[1]
    except HarvestError:
        return np.inf


def refine_windows(table: pd.DataFrame, family: GeometryFamily, spec: SwitchingSpec, lam: float = 1.0,
                   xatol: float = WINDOW_XATOL) -> list:
    """Rows for harvesting windows narrower than the omega_t grid step.

    Every non-harvesting grid point whose margin is a local maximum is
    refined with a bounded scalar search between its neighbours; a row is
    returned for each search that ends on a harvesting point.
    """
    omega = table[OMEGA].to_numpy(dtype=float)
    margin = np.nan_to_num(table['margin'].to_numpy(dtype=float), nan=-np.inf)
    harvesting = np.nan_to_num(table['negativity'].to_numpy(dtype=float), nan=0.0) > 0
    padded = np.concatenate([[-np.inf], margin, [-np.inf]])
    peaks = np.flatnonzero((margin >= padded[:-2]) & (margin >= padded[2:]) & np.isfinite(margin) & ~harvesting)
    rows = []
    for i in peaks:
        lo, hi = omega[max(i - 1, 0)], omega[min(i + 1, len(omega) - 1)]
        if hi <= lo:
            continue
        best = so.minimize_scalar(_negative_margin, bounds=(lo, hi), method='bounded', args=(family, spec, lam),
                                  options={'xatol': xatol})
        if not np.isfinite(best.fun) or -best.fun <= 0:
            continue
        res, margin_at = harvest_margin(family, float(best.x), spec, lam)
        if res.value > 0:
            logger.info(f"{family.kind.value} {switching_label(spec)}: narrow harvesting window at "
                        f"omega_t={best.x:.6g} between grid points {lo:g} and {hi:g}")
            rows.append({OMEGA: float(best.x), 'negativity': res.value, 'margin': margin_at, 'status': OK,
                         'refined': True})
    return rows


def switching_compare(omega_axis: Axis, switchings, families=COMPARE_FAMILIES, lam: float = 1.0,
                      workers: int = 1, refine_narrow: bool = True) -> pd.DataFrame:
    """Negativity against omega_t for each (family, switching) pair.

    Grid rows are followed, in omega_t order, by rows marked `refined` for
    harvesting windows that fall between grid points.
    """
    if omega_axis.name != OMEGA:
        raise DomainError(f"switching comparisons run over omega_t, got axis {omega_axis.name!r}")
    frames = []
    for name in families:
        if name not in COMPARE_FAMILIES:
            raise DomainError(f'switching comparisons cover {list(COMPARE_FAMILIES)}, got {name!r}')
        kind, params = SCALED_BASES[name]
        family = GeometryFamily(kind, params)
        for spec in switchings:
            plan = SweepPlan(family=family, axes=(omega_axis,), spec=spec, lam=lam, workers=workers)
            points = plan.points()
            blocks = _blocks(points, max(1, -(-len(points) // (4 * plan.workers))))
            rows = _map_blocks(functools.partial(_compare_block, family=family, spec=spec, lam=lam), blocks,
                               plan.workers)
            table = pd.DataFrame([r for block in rows for r in block],
                                 columns=[OMEGA, 'negativity', 'margin', 'status'])
            table['refined'] = False
            if refine_narrow:
                extra = refine_windows(table, family, spec, lam)
                if extra:
                    table = pd.concat([table, pd.DataFrame(extra)], ignore_index=True)
                    table = table.sort_values(OMEGA, kind='stable', ignore_index=True)
            table.insert(0, 'delta', spec.delta if spec.family is SwitchingFamily.POLYNOMIAL else np.nan)
            table.insert(0, 'switching', spec.family.value)
            table.insert(0, 'family', name)
            table['harvests'] = table['negativity'] > 0
            frames.append(table)
    return pd.concat(frames, ignore_index=True)


def harvesting_intervals(omega_t, negativity) -> list:
    """Maximal runs of grid points with positive negativity, as (first, last) omega_t pairs."""
    omega_t = np.asarray(omega_t, dtype=float)
    on = np.nan_to_num(np.asarray(negativity, dtype=float), nan=0.0) > 0
    edges = np.diff(np.concatenate([[0], on.astype(np.int8), [0]]))
    starts, stops = np.flatnonzero(edges == 1), np.flatnonzero(edges == -1) - 1
    return [(float(omega_t[a]), float(omega_t[b])) for a, b in zip(starts, stops)]


def interval_table(table: pd.DataFrame) -> pd.DataFrame:
    rows = []
    for (family, switching, delta), group in table.groupby(['family', 'switching', 'delta'], sort=False,
                                                           dropna=False):
        for k, (on, off) in enumerate(harvesting_intervals(group[OMEGA], group['negativity'])):
            rows.append({'family': family, 'switching': switching, 'delta': delta, 'interval': k,
                         'omega_t_on': on, 'omega_t_off': off})
    return pd.DataFrame(rows, columns=['family', 'switching', 'delta', 'interval', 'omega_t_on', 'omega_t_off'])


def onset_delta(omega_axis: Axis, deltas, family: str = 'pair', tol: float = 0.01, lam: float = 1.0,
                t_half: Optional[float] = None, workers: int = 1) -> Optional[float]:
    """Smallest polynomial-switching delta that harvests somewhere on omega_axis.

    The delta grid brackets the onset, bisection narrows it to tol; assumes
    harvesting, once present, persists for larger delta. None if no delta on
    the grid harvests.
    """
    cache = {}

    def harvests(delta):
        if delta not in cache:
            kwargs = {} if t_half is None else {'t_half': t_half}
            spec = SwitchingSpec(SwitchingFamily.POLYNOMIAL, delta=float(delta), **kwargs)
            table = switching_compare(omega_axis, [spec], families=(family,), lam=lam, workers=workers)
            cache[delta] = bool(table['harvests'].any())
            logger.debug(f"delta={delta:g}: {'harvests' if cache[delta] else 'no harvesting'}")
        return cache[delta]

    prev = None
    for delta in sorted(float(d) for d in deltas):
        if harvests(delta):
            break
        prev = delta
    else:
        return None
    if prev is None:
        return delta
    lo, hi = prev, delta
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if harvests(mid):
            hi = mid
        else:
            lo = mid
    logger.info(f"{family}: harvesting sets in between delta={lo:.4g} and {hi:.4g}")
    return hi


def _element_row(point, spec: SwitchingSpec, lam: float) -> dict:
    x_over_l, omega_t = (float(v) for v in point)
    row = {'x_over_l': x_over_l, OMEGA: omega_t}
    try:
        params = ElementParams.dimensionless(omega_t, x_over_l, spec, lam)
        if spec.family is SwitchingFamily.GAUSSIAN:
            elems = gaussian_elements(params)
        else:
            elems = quadrature_elements(params)
        abs_x = abs(elems.X) if elems.Xm is not None else np.nan
        ratio_c, ratio_x = commutator_ratios(params)
        row.update(P=elems.P, abs_C=abs(elems.C), abs_X=abs_x, x_minus_p=abs_x - elems.P,
                   ratio_c=ratio_c, ratio_x=ratio_x, status=OK)
    except HarvestError as e:
        logger.debug(f"elements at {row}: {e}")
        row.update(P=np.nan, abs_C=np.nan, abs_X=np.nan, x_minus_p=np.nan, ratio_c=np.nan,
                   ratio_x=np.nan, status=type(e).__name__)
    return row


def _element_block(points, spec: SwitchingSpec, lam: float) -> list:
    try:
        return [_element_row(p, spec, lam) for p in points]
    finally:
        spool_profiles()


def element_scan(x_axis: Axis, omega_axis: Axis, spec: SwitchingSpec = SwitchingSpec(), lam: float = 1.0,
                 workers: int = 1) -> pd.DataFrame:
    """P, |C|, |X|, |X| - P and the commutator ratios over an (x/L, omega_t) grid."""
    points = list(itertools.product(x_axis.values(), omega_axis.values()))
    blocks = _blocks(points, omega_axis.num)
    rows = _map_blocks(functools.partial(_element_block, spec=spec, lam=lam), blocks, workers)
    return pd.DataFrame([r for block in rows for r in block])
