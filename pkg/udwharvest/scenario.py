"""YAML scenario files.

A scenario has four sections, all optional:

    system:   t_half, lam, omega_t, allow_timelike, kappa_cutoff,
              switching: {family, sigma, t_half, delta}
    geometry: family, params: {...}, bases: [...], families: [...]
    sweep:    axes: {name: {start, stop, num}}, refine, workers, grid,
              max_n, fit_omegas, switchings: [{family, delta, ...}],
              deltas: {start, stop, num}, n, trials, seed
    output:   path, full_precision, figure

Unknown keys anywhere raise ConfigError.
"""
from dataclasses import dataclass, field
from typing import Mapping, Optional

import yaml
from loguru import logger

from .configs import SCALED_BASES, GeometryFamily
from .errors import ConfigError, HarvestError
from .switching import DEFAULT_KAPPA_CUTOFF, DEFAULT_T, SwitchingSpec
from .sweep import COMPARE_FAMILIES, FIT_OMEGAS, Axis

SECTIONS = ('system', 'geometry', 'sweep', 'output')
SYSTEM_KEYS = ('t_half', 'lam', 'omega_t', 'allow_timelike', 'kappa_cutoff', 'switching')
SWITCHING_KEYS = ('family', 'sigma', 't_half', 'delta')
GEOMETRY_KEYS = ('family', 'params', 'bases', 'families')
SWEEP_KEYS = ('axes', 'refine', 'workers', 'grid', 'max_n', 'fit_omegas', 'switchings', 'deltas',
              'n', 'trials', 'seed')
AXIS_KEYS = ('start', 'stop', 'num')
OUTPUT_KEYS = ('path', 'full_precision', 'figure')


@dataclass(frozen=True)
class SystemSection:
    t_half: float = DEFAULT_T
    lam: float = 1.0
    omega_t: Optional[float] = None
    allow_timelike: bool = False
    switching: SwitchingSpec = SwitchingSpec()


@dataclass(frozen=True)
class GeometrySection:
    family: Optional[str] = None
    params: Mapping = field(default_factory=dict)
    bases: tuple = tuple(SCALED_BASES)
    families: tuple = COMPARE_FAMILIES

    def geometry(self) -> GeometryFamily:
        if self.family is None:
            raise ConfigError('geometry.family is required for this command')
        try:
            return GeometryFamily(self.family, self.params)
        except HarvestError as e:
            raise ConfigError(f'geometry: {e}') from e


@dataclass(frozen=True)
class SweepSection:
    axes: tuple = ()
    refine: bool = False
    workers: Optional[int] = None
    grid: int = 9
    max_n: int = 50
    fit_omegas: tuple = FIT_OMEGAS
    switchings: tuple = ()
    deltas: Optional[Axis] = None
    n: int = 3
    trials: int = 20
    seed: int = 0

    def axis(self, name: str) -> Optional[Axis]:
        for a in self.axes:
            if a.name == name:
                return a
        return None


@dataclass(frozen=True)
class OutputSection:
    path: Optional[str] = None
    full_precision: bool = False
    figure: Optional[str] = None


@dataclass(frozen=True)
class ScenarioConfig:
    system: SystemSection = SystemSection()
    geometry: GeometrySection = GeometrySection()
    sweep: SweepSection = SweepSection()
    output: OutputSection = OutputSection()


def _mapping(val, where: str) -> dict:
    if val is None:
        return {}
    if not isinstance(val, Mapping):
        raise ConfigError(f'{where} must be a mapping, got {type(val).__name__}')
    return dict(val)


def _check_keys(section: dict, allowed, where: str):
    unknown = sorted(str(k) for k in section if k not in allowed)
    if unknown:
        raise ConfigError(f'unknown key(s) {unknown} in {where}; allowed: {list(allowed)}')


def _number(val, where: str, kind=float):
    if isinstance(val, bool):
        raise ConfigError(f'{where} must be a number, got {val!r}')
    try:
        out = kind(val)
    except (TypeError, ValueError):
        raise ConfigError(f'{where} must be a number, got {val!r}') from None
    if kind is int and out != val:
        raise ConfigError(f'{where} must be an integer, got {val!r}')
    return out


def _flag(val, where: str) -> bool:
    if not isinstance(val, bool):
        raise ConfigError(f'{where} must be true or false, got {val!r}')
    return val


def _names(val, where: str) -> tuple:
    if isinstance(val, str) or not isinstance(val, (list, tuple)):
        raise ConfigError(f'{where} must be a list of names')
    return tuple(str(v).strip().lower() for v in val)


def _switching(doc, where: str, t_half: float, kappa_cutoff: float) -> SwitchingSpec:
    doc = _mapping(doc, where)
    _check_keys(doc, SWITCHING_KEYS, where)
    kwargs = {'t_half': _number(doc.get('t_half', t_half), f'{where}.t_half'),
              'kappa_cutoff': kappa_cutoff}
    if 'family' in doc:
        kwargs['family'] = doc['family']
    for key in ('sigma', 'delta'):
        if doc.get(key) is not None:
            kwargs[key] = _number(doc[key], f'{where}.{key}')
    try:
        return SwitchingSpec(**kwargs)
    except HarvestError as e:
        raise ConfigError(f'{where}: {e}') from e


def _axis(name: str, doc, where: str) -> Axis:
    doc = _mapping(doc, where)
    _check_keys(doc, AXIS_KEYS, where)
    missing = [k for k in AXIS_KEYS if k not in doc]
    if missing:
        raise ConfigError(f'{where} is missing {missing}')
    try:
        return Axis(name, _number(doc['start'], f'{where}.start'), _number(doc['stop'], f'{where}.stop'),
                    _number(doc['num'], f'{where}.num', int))
    except HarvestError as e:
        raise ConfigError(f'{where}: {e}') from e


def _system(doc) -> SystemSection:
    doc = _mapping(doc, 'system')
    _check_keys(doc, SYSTEM_KEYS, 'system')
    t_half = _number(doc.get('t_half', DEFAULT_T), 'system.t_half')
    cutoff = _number(doc.get('kappa_cutoff', DEFAULT_KAPPA_CUTOFF), 'system.kappa_cutoff')
    omega_t = doc.get('omega_t')
    return SystemSection(
        t_half=t_half,
        lam=_number(doc.get('lam', 1.0), 'system.lam'),
        omega_t=None if omega_t is None else _number(omega_t, 'system.omega_t'),
        allow_timelike=_flag(doc.get('allow_timelike', False), 'system.allow_timelike'),
        switching=_switching(doc.get('switching'), 'system.switching', t_half, cutoff),
    )


def _geometry(doc) -> GeometrySection:
    doc = _mapping(doc, 'geometry')
    _check_keys(doc, GEOMETRY_KEYS, 'geometry')
    params = _mapping(doc.get('params'), 'geometry.params')
    out = GeometrySection(
        family=None if doc.get('family') is None else str(doc['family']),
        params={str(k): v if isinstance(v, str) else _number(v, f'geometry.params.{k}')
                for k, v in params.items()},
        bases=_names(doc['bases'], 'geometry.bases') if 'bases' in doc else tuple(SCALED_BASES),
        families=_names(doc['families'], 'geometry.families') if 'families' in doc else COMPARE_FAMILIES,
    )
    if out.family is not None:
        out.geometry()
    return out


def _sweep(doc, system: SystemSection) -> SweepSection:
    doc = _mapping(doc, 'sweep')
    _check_keys(doc, SWEEP_KEYS, 'sweep')
    axes = tuple(_axis(str(name), spec, f'sweep.axes.{name}')
                 for name, spec in _mapping(doc.get('axes'), 'sweep.axes').items())
    switchings = doc.get('switchings', [])
    if not isinstance(switchings, (list, tuple)):
        raise ConfigError('sweep.switchings must be a list')
    cutoff = system.switching.kappa_cutoff
    workers = doc.get('workers')
    if workers is not None:
        workers = _number(workers, 'sweep.workers', int)
        if workers < 1:
            raise ConfigError(f'sweep.workers must be at least 1, got {workers}')
    return SweepSection(
        axes=axes,
        refine=_flag(doc.get('refine', False), 'sweep.refine'),
        workers=workers,
        grid=_number(doc.get('grid', 9), 'sweep.grid', int),
        max_n=_number(doc.get('max_n', 50), 'sweep.max_n', int),
        fit_omegas=tuple(_number(w, 'sweep.fit_omegas') for w in doc.get('fit_omegas', FIT_OMEGAS)),
        switchings=tuple(_switching(s, f'sweep.switchings[{k}]', system.t_half, cutoff)
                         for k, s in enumerate(switchings)),
        deltas=_axis('delta', doc['deltas'], 'sweep.deltas') if 'deltas' in doc else None,
        n=_number(doc.get('n', 3), 'sweep.n', int),
        trials=_number(doc.get('trials', 20), 'sweep.trials', int),
        seed=_number(doc.get('seed', 0), 'sweep.seed', int),
    )


def _output(doc) -> OutputSection:
    doc = _mapping(doc, 'output')
    _check_keys(doc, OUTPUT_KEYS, 'output')
    figure = doc.get('figure')
    path = doc.get('path')
    return OutputSection(path=None if path is None else str(path),
                         full_precision=_flag(doc.get('full_precision', False), 'output.full_precision'),
                         figure=None if figure is None else str(figure))


def parse_scenario(doc) -> ScenarioConfig:
    doc = _mapping(doc, 'scenario')
    _check_keys(doc, SECTIONS, 'scenario')
    system = _system(doc.get('system'))
    return ScenarioConfig(system=system, geometry=_geometry(doc.get('geometry')),
                          sweep=_sweep(doc.get('sweep'), system), output=_output(doc.get('output')))


def load_scenario(path) -> ScenarioConfig:
    try:
        with open(path) as f:
            doc = yaml.safe_load(f)
    except OSError as e:
        raise ConfigError(f'cannot read scenario {path}: {e}') from e
    except yaml.YAMLError as e:
        raise ConfigError(f'scenario {path} is not valid YAML: {e}') from e
    config = parse_scenario(doc)
    logger.debug(f"loaded scenario {path}")
    return config
