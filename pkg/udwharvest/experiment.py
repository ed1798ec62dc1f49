import os
import tempfile
import uuid
from abc import ABC, abstractmethod

import pandas as pd
from loguru import logger

from .resources import ResourceMeter
from .utils import PROFILE_DIR_ENV, clear_profiles, get_profiles

SIX_DIGITS = '%.6g'
FULL_PRECISION = '%.17g'
SCRATCH_PREFIX = 'udwharvest-'


class Experiment(ABC):
    def __init__(self, work_dir: str = None, output: str = 'results.csv', full_precision: bool = False):
        # None: run() works in a temporary directory removed afterwards
        self.work_dir = work_dir
        self.output = output
        self.full_precision = full_precision
        self.table = None

    @property
    def float_format(self) -> str:
        return FULL_PRECISION if self.full_precision else SIX_DIGITS

    @abstractmethod
    def setup(self):
        pass

    @abstractmethod
    def _run(self) -> pd.DataFrame:
        pass

    def run(self) -> dict:
        if self.work_dir is None:
            with tempfile.TemporaryDirectory(prefix=SCRATCH_PREFIX) as scratch:
                return self._run_in(scratch)
        return self._run_in(self.work_dir)

    def _run_in(self, work_dir: str) -> dict:
        os.makedirs(work_dir, exist_ok=True)

        profile_dir = os.path.join(work_dir, 'profiles')
        os.makedirs(profile_dir, exist_ok=True)
        os.environ[PROFILE_DIR_ENV] = profile_dir

        try:
            clear_profiles()
            with ResourceMeter(self.__class__.__name__) as meter:
                self.table = self._run()
            metrics = meter.results
            metrics['rows'] = 0 if self.table is None else len(self.table)
            metrics['function_profiles'] = get_profiles()
            return metrics
        finally:
            if PROFILE_DIR_ENV in os.environ:
                del os.environ[PROFILE_DIR_ENV]

    def write_results(self):
        """Result table to self.output, overwritten; deterministic for a given experiment."""
        if self.table is not None:
            self.table.to_csv(self.output, index=False, float_format=self.float_format)


def _append(frame: pd.DataFrame, path: str):
    frame.to_csv(path, mode='a', header=not os.path.exists(path), index=False)


def run_experiment(exp: Experiment, runs: int = 1, verbose: bool = False) -> pd.DataFrame:
    """
    Run an Experiment and write three CSV files: the result table
    (overwritten), plus run metrics and function profiles (appended, one
    run_uuid per run). Returns the result table of the last run.
    """
    exp.setup()
    output_dir = os.path.dirname(exp.output)
    if output_dir:
        os.makedirs(output_dir, exist_ok=True)

    all_results = []
    for i in range(runs):
        run_data = exp.run()
        run_data['run_uuid'] = str(uuid.uuid4())
        all_results.append(run_data)
        if verbose:
            print_metrics = {k: v for k, v in run_data.items() if k != 'function_profiles'}
            logger.info(f"Run {i + 1} metrics: {print_metrics}")

    if not all_results:
        logger.warning("No experiment runs were performed.")
        return None

    exp.write_results()
    base, ext = os.path.splitext(exp.output)
    metrics_file = f"{base}_metrics{ext or '.csv'}"
    profiles_file = f"{base}_profiles{ext or '.csv'}"

    metrics = pd.DataFrame([{k: v for k, v in r.items() if k != 'function_profiles'} for r in all_results])
    metrics = metrics[['run_uuid'] + [c for c in metrics.columns if c != 'run_uuid']]
    _append(metrics, metrics_file)

    profiles = pd.DataFrame([{'run_uuid': r['run_uuid'], **rec} for r in all_results for rec in r['function_profiles']],
                            columns=['run_uuid', 'func_name', 'call_count', 'elapsed_ns'])
    _append(profiles, profiles_file)

    logger.info(f"Results written to {exp.output}, {metrics_file}, and {profiles_file}")
    return exp.table
