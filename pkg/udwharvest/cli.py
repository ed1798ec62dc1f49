"""Command-line entry point.

Exit codes: 0 on success, 1 when any row (or oracle trial) failed, 2 on
usage or scenario errors.
"""
import argparse
import dataclasses
import os
import sys

import numpy as np
import pandas as pd
from loguru import logger

from . import oracle, plotting
from .elements import ElementParams, gaussian_elements, quadrature_elements
from .errors import ConfigError, HarvestError
from .experiment import FULL_PRECISION, SIX_DIGITS, Experiment, run_experiment
from .resources import default_workers
from .scenario import ScenarioConfig, load_scenario
from .switching import DEFAULT_DELTA, DEFAULT_T, SwitchingFamily, SwitchingSpec
from .sweep import (OK, OMEGA, SCALE_OMEGA_T, Axis, SweepPlan, chain_scan, default_box, element_scan,
                    harvesting_extent, interval_table, onset_delta, optimize, refine_sweep, run_sweep, scale_scan,
                    switching_compare, switching_label)

SWEEP_NUM = 41
CHAIN_OMEGAS = Axis(OMEGA, 10.0, 35.0, 51)
SCALE_AXIS = Axis('l_over_l', 1.0, 6.0, 51)
COMPARE_OMEGAS = Axis(OMEGA, 0.0, 60.0, 121)
SCAN_X = Axis('x_over_l', 0.1, 5.0, 50)
SCAN_OMEGAS = Axis(OMEGA, 0.0, 35.0, 71)
DEFAULT_SWITCHINGS = (
    {'family': 'truncated'},
    {'family': 'polynomial', 'delta': 1.0},
    {'family': 'polynomial', 'delta': 1.9},
    {'family': 'polynomial', 'delta': 2.0},
    {'family': 'polynomial', 'delta': DEFAULT_DELTA},
)


def _fmt(val, full_precision: bool = False) -> str:
    spec = FULL_PRECISION if full_precision else SIX_DIGITS
    if val is None:
        return 'n/a'
    if isinstance(val, (bool, np.bool_)):
        return str(bool(val)).lower()
    if isinstance(val, complex) or np.iscomplexobj(val):
        val = complex(val)
        if val.imag == 0:
            return spec % val.real
        return f'{spec % val.real}{"+" if val.imag >= 0 else "-"}{spec % abs(val.imag)}j'
    return spec % val


def _emit(line: str):
    print(line, flush=True)


def _status_code(table: pd.DataFrame) -> int:
    if table is None or 'status' not in table:
        return 0
    failed = int((table['status'] != OK).sum())
    if failed:
        logger.error(f"{failed} of {len(table)} rows failed")
        return 1
    return 0


def _sibling(path: str, suffix: str) -> str:
    base, ext = os.path.splitext(path)
    return f"{base}_{suffix}{ext or '.csv'}"


class SweepExperiment(Experiment):
    """Dense grid over a geometry family, optionally refined from the grid maxima."""
    def __init__(self, plan: SweepPlan, **kwargs):
        super().__init__(**kwargs)
        self.plan = plan
        self.optima = []

    def setup(self):
        logger.debug(f"sweep plan {self.plan}")

    def _run(self) -> pd.DataFrame:
        table = run_sweep(self.plan)
        if self.plan.refine:
            self.optima = refine_sweep(self.plan, table)
        return table


class OptimizeExperiment(Experiment):
    def __init__(self, family, box, omega_t, spec, lam, grid, workers, allow_timelike, **kwargs):
        super().__init__(**kwargs)
        self.args = dict(family=family, box=box, omega_t=omega_t, spec=spec, lam=lam, grid=grid,
                         workers=workers, allow_timelike=allow_timelike)
        self.report = None

    def setup(self):
        pass

    def _run(self) -> pd.DataFrame:
        self.report = optimize(**self.args)
        return pd.DataFrame([self.report.to_row()])


class ChainExperiment(Experiment):
    def __init__(self, max_n, omega_axis, spec, lam, fit_omegas, workers, **kwargs):
        super().__init__(**kwargs)
        self.max_n = max_n
        self.omega_axis = omega_axis
        self.spec = spec
        self.lam = lam
        self.fit_omegas = fit_omegas
        self.workers = workers
        self.scan = None

    def setup(self):
        pass

    def _run(self) -> pd.DataFrame:
        self.scan = chain_scan(self.max_n, self.omega_axis.values(), self.spec, self.lam,
                               fit_omegas=self.fit_omegas, workers=self.workers)
        return self.scan.table


class ScaleExperiment(Experiment):
    def __init__(self, l_axis, bases, omega_t, spec, lam, workers, **kwargs):
        super().__init__(**kwargs)
        self.args = dict(l_axis=l_axis, bases=bases, omega_t=omega_t, spec=spec, lam=lam, workers=workers)

    def setup(self):
        pass

    def _run(self) -> pd.DataFrame:
        return scale_scan(**self.args)


class SwitchingCompareExperiment(Experiment):
    def __init__(self, omega_axis, switchings, families, lam, workers, deltas=None, **kwargs):
        super().__init__(**kwargs)
        self.omega_axis = omega_axis
        self.switchings = switchings
        self.families = families
        self.lam = lam
        self.workers = workers
        self.deltas = deltas
        self.onsets = {}

    def setup(self):
        pass

    def _run(self) -> pd.DataFrame:
        table = switching_compare(self.omega_axis, self.switchings, self.families, self.lam, self.workers)
        if self.deltas is not None:
            t_half = self.switchings[0].t_half if self.switchings else None
            for family in self.families:
                self.onsets[family] = onset_delta(self.omega_axis, self.deltas.values(), family, lam=self.lam,
                                                  t_half=t_half, workers=self.workers)
        return table


class OracleExperiment(Experiment):
    def __init__(self, n, trials, seed, omega_t, spec, **kwargs):
        super().__init__(**kwargs)
        self.args = dict(n=n, trials=trials, seed=seed, omega_t=omega_t, spec=spec)
        self.trials = []

    def setup(self):
        pass

    def _run(self) -> pd.DataFrame:
        self.trials = oracle.oracle_check(**self.args)
        return pd.DataFrame([{**dataclasses.asdict(t), 'passed': t.passed} for t in self.trials])


class ElementScanExperiment(Experiment):
    def __init__(self, x_axis, omega_axis, spec, lam, workers, **kwargs):
        super().__init__(**kwargs)
        self.args = dict(x_axis=x_axis, omega_axis=omega_axis, spec=spec, lam=lam, workers=workers)

    def setup(self):
        pass

    def _run(self) -> pd.DataFrame:
        return element_scan(**self.args)


def _scenario(args) -> ScenarioConfig:
    return load_scenario(args.config) if getattr(args, 'config', None) else ScenarioConfig()


def _workers(args, config: ScenarioConfig) -> int:
    if getattr(args, 'workers', None):
        return args.workers
    return config.sweep.workers or default_workers()


def _exp_kwargs(args, config: ScenarioConfig, command: str) -> dict:
    return {'output': args.output or config.output.path or f'{command.replace("-", "_")}.csv',
            'full_precision': args.full_precision or config.output.full_precision}


def _family(args, config: ScenarioConfig):
    if getattr(args, 'family', None):
        return dataclasses.replace(config.geometry, family=args.family).geometry()
    return config.geometry.geometry()


def cmd_elements(args, parser) -> int:
    family = SwitchingFamily.parse(args.switching)
    try:
        spec = SwitchingSpec(family, t_half=args.t, delta=args.delta)
        params = ElementParams.dimensionless(args.omega_t, args.x_over_l, spec, args.lam)
        elems = gaussian_elements(params) if family is SwitchingFamily.GAUSSIAN else quadrature_elements(params)
    except HarvestError as e:
        parser.error(str(e))
    fp = args.full_precision
    abs_x = abs(elems.X) if elems.Xm is not None else abs(elems.Xp)
    for name, val in (('P', elems.P), ('C+', elems.Cp), ('C-', elems.Cm), ('X+', elems.Xp), ('X-', elems.Xm),
                      ('|X|', abs_x), ('|X|>P', elems.harvests)):
        _emit(f'{name}\t{_fmt(val, fp)}')
    return 0


def cmd_sweep(args, parser) -> int:
    config = _scenario(args)
    family = _family(args, config)
    axes = config.sweep.axes
    if not axes:
        box = default_box(family.kind)
        axes = tuple(Axis(n, lo, hi, SWEEP_NUM) for n, (lo, hi) in box.items())
    try:
        plan = SweepPlan(family=family, axes=axes, spec=config.system.switching, lam=config.system.lam,
                         omega_t=config.system.omega_t, refine=args.refine or config.sweep.refine,
                         workers=_workers(args, config), allow_timelike=config.system.allow_timelike)
    except HarvestError as e:
        raise ConfigError(f'sweep plan: {e}') from e
    exp = SweepExperiment(plan, **_exp_kwargs(args, config, 'sweep'))
    table = run_experiment(exp, verbose=args.verbose)
    if exp.optima:
        optima = pd.DataFrame([r.to_row() for r in exp.optima])
        optima.to_csv(_sibling(exp.output, 'optima'), index=False, float_format=exp.float_format)
        for report in exp.optima:
            _emit(_report_line(report, exp.full_precision))
    ok = table[table['status'] == OK]
    if not ok.empty:
        best = ok.loc[ok['negativity'].idxmax()]
        _emit('grid max: ' + ' '.join(f'{n}={_fmt(best[n], exp.full_precision)}' for n in plan.columns)
              + f' negativity={_fmt(best["negativity"], exp.full_precision)}')
    if config.output.figure:
        names = [a.name for a in plan.axes if a.num > 1]
        if len(names) == 2:
            plotting.heatmap(table, names[0], names[1], config.output.figure)
        elif len(names) == 1:
            plotting.lines(table, names[0], 'negativity', config.output.figure)
    return _status_code(table)


def _report_line(report, full_precision: bool) -> str:
    params = ' '.join(f'{k}={_fmt(v, full_precision)}' for k, v in report.params.items())
    state = 'converged' if report.converged else 'not converged'
    return f'{report.family}: {params} negativity={_fmt(report.value, full_precision)} ({state})'


def cmd_optimize(args, parser) -> int:
    config = _scenario(args)
    family = _family(args, config)
    box = {a.name: (a.start, a.stop) for a in config.sweep.axes} or None
    omega_t = args.omega_t if args.omega_t is not None else config.system.omega_t
    if box is not None and OMEGA not in box and omega_t is None:
        raise ConfigError('optimize needs omega_t either in sweep.axes or fixed')
    if box is None and omega_t is not None:
        box = {k: v for k, v in default_box(family.kind).items() if k != OMEGA}
    exp = OptimizeExperiment(family, box, omega_t, config.system.switching, config.system.lam,
                             args.grid or config.sweep.grid, _workers(args, config),
                             config.system.allow_timelike, **_exp_kwargs(args, config, 'optimize'))
    run_experiment(exp, verbose=args.verbose)
    _emit(_report_line(exp.report, exp.full_precision))
    return 0


def cmd_chain(args, parser) -> int:
    config = _scenario(args)
    omega_axis = config.sweep.axis(OMEGA) or CHAIN_OMEGAS
    exp = ChainExperiment(args.max_n or config.sweep.max_n, omega_axis, config.system.switching,
                          config.system.lam, config.sweep.fit_omegas, _workers(args, config),
                          **_exp_kwargs(args, config, 'chain'))
    table = run_experiment(exp, verbose=args.verbose)
    fits = pd.DataFrame([{OMEGA: w, 'slope': s, 'intercept': c} for w, (s, c) in sorted(exp.scan.fits.items())],
                        columns=[OMEGA, 'slope', 'intercept'])
    fits.to_csv(_sibling(exp.output, 'fit'), index=False, float_format=exp.float_format)
    fp = exp.full_precision
    _emit('fit: ' + '; '.join(f'slope at omega_t={_fmt(w, fp)} is {_fmt(s, fp)} per detector'
                              for w, (s, _) in sorted(exp.scan.fits.items())))
    if config.output.figure:
        plotting.lines(exp.scan.curves, OMEGA, 'negativity', config.output.figure, group='n')
    return _status_code(table)


def cmd_scale(args, parser) -> int:
    config = _scenario(args)
    l_axis = config.sweep.axis('l_over_l') or SCALE_AXIS
    omega_t = config.system.omega_t if config.system.omega_t is not None else SCALE_OMEGA_T
    exp = ScaleExperiment(l_axis, config.geometry.bases, omega_t, config.system.switching, config.system.lam,
                          _workers(args, config), **_exp_kwargs(args, config, 'scale'))
    table = run_experiment(exp, verbose=args.verbose)
    for base, extent in harvesting_extent(table).items():
        _emit(f'{base}: harvests up to l/L={_fmt(extent, exp.full_precision)}')
    if config.output.figure:
        plotting.lines(table, 'l_over_l', 'negativity', config.output.figure, group='base', logy=True)
    return _status_code(table)


def cmd_switching_compare(args, parser) -> int:
    config = _scenario(args)
    omega_axis = config.sweep.axis(OMEGA) or COMPARE_OMEGAS
    switchings = config.sweep.switchings or tuple(
        SwitchingSpec(t_half=config.system.t_half, kappa_cutoff=config.system.switching.kappa_cutoff, **s)
        for s in DEFAULT_SWITCHINGS)
    exp = SwitchingCompareExperiment(omega_axis, switchings, config.geometry.families, config.system.lam,
                                     _workers(args, config), deltas=config.sweep.deltas,
                                     **_exp_kwargs(args, config, 'switching-compare'))
    table = run_experiment(exp, verbose=args.verbose)
    intervals = interval_table(table)
    intervals.to_csv(_sibling(exp.output, 'intervals'), index=False, float_format=exp.float_format)
    for spec in switchings:
        for family in config.geometry.families:
            sel = intervals[(intervals['family'] == family) & (intervals['switching'] == spec.family.value)]
            if spec.family is SwitchingFamily.POLYNOMIAL:
                sel = sel[sel['delta'] == spec.delta]
            _emit(f'{family} {switching_label(spec)}: {len(sel)} harvesting interval(s)')
    for family, delta in exp.onsets.items():
        _emit(f'{family}: harvesting onset at delta={_fmt(delta, exp.full_precision)}')
    if config.output.figure:
        plotting.lines(table.assign(label=table['family'] + ' ' + table['switching'] + ' '
                                    + table['delta'].astype(str)),
                       OMEGA, 'negativity', config.output.figure, group='label')
    return _status_code(table)


def cmd_oracle_check(args, parser) -> int:
    config = _scenario(args)
    n = args.n or config.sweep.n
    trials = args.trials or config.sweep.trials
    seed = args.seed if args.seed is not None else config.sweep.seed
    omega_t = args.omega_t if args.omega_t is not None else (config.system.omega_t or 20.0)
    exp = OracleExperiment(n, trials, seed, omega_t, config.system.switching,
                           **_exp_kwargs(args, config, 'oracle-check'))
    run_experiment(exp, verbose=args.verbose)
    fp = exp.full_precision
    worst = max(exp.trials, key=lambda t: t.residual)
    passed = all(t.passed for t in exp.trials)
    exps = [t.exponent for t in exp.trials]
    _emit(f'{"PASS" if passed else "FAIL"}: {len(exp.trials)} trials, max residual {_fmt(worst.residual, fp)} '
          f'(bound {_fmt(worst.bound, fp)}), exponents in [{_fmt(min(exps), fp)}, {_fmt(max(exps), fp)}]')
    return 0 if passed else 1


def cmd_element_scan(args, parser) -> int:
    config = _scenario(args)
    spec = config.system.switching
    if args.switching:
        spec = dataclasses.replace(spec, family=SwitchingFamily.parse(args.switching))
    exp = ElementScanExperiment(config.sweep.axis('x_over_l') or SCAN_X, config.sweep.axis(OMEGA) or SCAN_OMEGAS,
                                spec, config.system.lam, _workers(args, config),
                                **_exp_kwargs(args, config, 'element-scan'))
    table = run_experiment(exp, verbose=args.verbose)
    if config.output.figure:
        plotting.heatmap(table, 'x_over_l', OMEGA, config.output.figure, value='x_minus_p')
    return _status_code(table)


def _positive_int(text: str) -> int:
    try:
        val = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f'expected an integer, got {text!r}') from None
    if val < 1:
        raise argparse.ArgumentTypeError(f'expected a positive integer, got {val}')
    return val


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='udwharvest',
                                     description='Leading-order entanglement harvesting by N pointlike detectors.')
    parser.add_argument('-v', '--verbose', action='store_true', help='debug logging')
    parser.add_argument('-q', '--quiet', action='store_true', help='warnings and errors only')
    parser.add_argument('--log-file', help='also log at DEBUG level to this file')
    parser.add_argument('--full-precision', action='store_true', help='17 significant digits instead of 6')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('elements', help='print P, C+, C-, X+, X- for one pair')
    p.add_argument('--switching', default='gaussian', choices=[f.value for f in SwitchingFamily])
    p.add_argument('--omega-t', type=float, required=True)
    p.add_argument('--x-over-l', type=float, required=True)
    p.add_argument('--t', type=float, default=DEFAULT_T, help='switching half-duration T')
    p.add_argument('--delta', type=float, default=DEFAULT_DELTA, help='polynomial switching exponent')
    p.add_argument('--lam', type=float, default=1.0)
    p.set_defaults(handler=cmd_elements)

    def scenario_parser(name, handler, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument('--config', help='YAML scenario file')
        p.add_argument('--output', help='result CSV path')
        p.add_argument('--workers', type=_positive_int)
        p.set_defaults(handler=handler)
        return p

    p = scenario_parser('sweep', cmd_sweep, 'dense grid over a geometry family')
    p.add_argument('--family')
    p.add_argument('--refine', action='store_true')

    p = scenario_parser('optimize', cmd_optimize, 'grid scan plus Nelder-Mead refinement')
    p.add_argument('--family')
    p.add_argument('--grid', type=_positive_int)
    p.add_argument('--omega-t', type=float)

    p = scenario_parser('chain', cmd_chain, 'alternating chains N = 2..max-n')
    p.add_argument('--max-n', type=_positive_int)

    scenario_parser('scale', cmd_scale, 'optimal configurations against their size')
    scenario_parser('switching-compare', cmd_switching_compare, 'negativity for compact switchings')

    p = scenario_parser('oracle-check', cmd_oracle_check, 'full-state check of the one-excitation reduction')
    p.add_argument('--n', type=_positive_int)
    p.add_argument('--trials', type=_positive_int)
    p.add_argument('--seed', type=int)
    p.add_argument('--omega-t', type=float)

    p = scenario_parser('element-scan', cmd_element_scan, 'element magnitudes over (x/L, omega T)')
    p.add_argument('--switching', choices=[f.value for f in SwitchingFamily])
    return parser


def _configure_logging(args):
    logger.remove()
    level = 'DEBUG' if args.verbose else ('WARNING' if args.quiet else 'INFO')
    logger.add(sys.stderr, level=level)
    if args.log_file:
        logger.add(args.log_file, level='DEBUG')


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args)
    try:
        return args.handler(args, parser)
    except ConfigError as e:
        logger.error(str(e))
        return 2
    except HarvestError as e:
        logger.error(str(e))
        return 1
