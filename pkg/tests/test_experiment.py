import os
import tempfile

import pandas as pd
import pytest

from udwharvest.experiment import Experiment, run_experiment
from udwharvest.utils import PROFILE_DIR_ENV, timed_profile


@timed_profile
def _square(x):
    return x * x


class SquaresExperiment(Experiment):
    def __init__(self, count, **kwargs):
        super().__init__(**kwargs)
        self.count = count
        self.setup_calls = 0

    def setup(self):
        self.setup_calls += 1

    def _run(self) -> pd.DataFrame:
        return pd.DataFrame({'x': range(self.count), 'y': [_square(x) / 3 for x in range(self.count)]})


def test_run_experiment_writes_three_files(tmp_path):
    out = str(tmp_path / 'nested' / 'squares.csv')
    exp = SquaresExperiment(4, work_dir=str(tmp_path / 'work'), output=out)
    table = run_experiment(exp, runs=2)
    assert exp.setup_calls == 1
    assert len(table) == 4
    assert PROFILE_DIR_ENV not in os.environ

    results = pd.read_csv(out)
    assert results['x'].tolist() == [0, 1, 2, 3]
    # six significant digits by default
    assert results['y'][1] == 0.333333

    metrics = pd.read_csv(tmp_path / 'nested' / 'squares_metrics.csv')
    assert len(metrics) == 2
    assert metrics.columns[0] == 'run_uuid'
    assert metrics['rows'].tolist() == [4, 4]
    assert metrics['run_uuid'].nunique() == 2

    profiles = pd.read_csv(tmp_path / 'nested' / 'squares_profiles.csv')
    calls = profiles[profiles['func_name'] == '_square']
    assert calls['call_count'].tolist() == [4, 4]
    assert set(calls['run_uuid']) == set(metrics['run_uuid'])


def test_results_overwritten_metrics_appended(tmp_path):
    out = str(tmp_path / 'squares.csv')
    run_experiment(SquaresExperiment(5, work_dir=str(tmp_path / 'w1'), output=out))
    run_experiment(SquaresExperiment(2, work_dir=str(tmp_path / 'w2'), output=out, full_precision=True))
    results = pd.read_csv(out)
    assert len(results) == 2
    assert results['y'][1] == pytest.approx(1.0 / 3.0, rel=1e-15)
    metrics = pd.read_csv(tmp_path / 'squares_metrics.csv')
    assert metrics['rows'].tolist() == [5, 2]


def test_zero_runs(tmp_path):
    exp = SquaresExperiment(3, work_dir=str(tmp_path), output=str(tmp_path / 'none.csv'))
    assert run_experiment(exp, runs=0) is None
    assert not os.path.exists(tmp_path / 'none.csv')


def test_default_work_dir_is_removed(tmp_path, monkeypatch):
    monkeypatch.setattr(tempfile, 'tempdir', str(tmp_path))
    exp = SquaresExperiment(3, output=str(tmp_path / 'squares.csv'))
    assert exp.work_dir is None
    metrics = exp.run()
    assert metrics['rows'] == 3
    assert [r['call_count'] for r in metrics['function_profiles'] if r['func_name'] == '_square'] == [3]
    assert not [p for p in os.listdir(tmp_path) if p.startswith('udwharvest-')]
    assert PROFILE_DIR_ENV not in os.environ
