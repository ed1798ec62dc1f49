import glob
import os

import pytest

from udwharvest.configs import GeometryKind
from udwharvest.errors import ConfigError
from udwharvest.scenario import load_scenario, parse_scenario
from udwharvest.switching import SwitchingFamily
from udwharvest.sweep import COMPARE_FAMILIES, FIT_OMEGAS

SCENARIO_DIR = os.path.join(os.path.dirname(__file__), '..', 'scenarios')


def test_defaults():
    config = parse_scenario({})
    assert config.system.t_half == 0.01
    assert config.system.omega_t is None
    assert config.system.switching.family is SwitchingFamily.GAUSSIAN
    assert config.sweep.axes == ()
    assert config.sweep.fit_omegas == FIT_OMEGAS
    assert config.geometry.families == COMPARE_FAMILIES
    assert config.output.path is None
    assert parse_scenario(None) == config
    with pytest.raises(ConfigError):
        config.geometry.geometry()


def test_full_document():
    config = parse_scenario({
        'system': {'t_half': 0.02, 'lam': 0.5, 'omega_t': 24.49, 'kappa_cutoff': 1e4,
                   'switching': {'family': 'cp', 'delta': 2.0}},
        'geometry': {'family': 'Skewed_Square', 'params': {'x_over_l': 1.2}},
        'sweep': {'axes': {'x_over_l': {'start': 0.5, 'stop': 1.4, 'num': 10}},
                  'refine': True, 'workers': 2, 'switchings': [{'family': 'truncated'}]},
        'output': {'path': 'out.csv', 'full_precision': True},
    })
    spec = config.system.switching
    assert spec.family is SwitchingFamily.POLYNOMIAL
    assert spec.t_half == 0.02 and spec.delta == 2.0 and spec.kappa_cutoff == 1e4
    assert config.system.lam == 0.5
    assert config.geometry.geometry().kind is GeometryKind.SKEWED_SQUARE
    axis = config.sweep.axis('x_over_l')
    assert (axis.start, axis.stop, axis.num) == (0.5, 1.4, 10)
    assert config.sweep.axis('omega_t') is None
    assert config.sweep.refine and config.sweep.workers == 2
    # switchings inherit the system switching time
    assert config.sweep.switchings[0].t_half == 0.02
    assert config.output.full_precision


@pytest.mark.parametrize('doc', [
    {'system': {'gap': 20.0}},
    {'geometry': {'family': 'pair', 'size': 1.0}},
    {'sweep': {'axes': {'x_over_l': {'start': 1.0, 'stop': 2.0, 'num': 3, 'step': 0.5}}}},
    {'output': {'format': 'json'}},
    {'plots': {}},
    {'system': {'switching': {'family': 'gaussian', 'width': 1.0}}},
])
def test_unknown_keys(doc):
    with pytest.raises(ConfigError, match='unknown key'):
        parse_scenario(doc)


@pytest.mark.parametrize('doc', [
    {'system': {'lam': 'one'}},
    {'system': {'allow_timelike': 'yes'}},
    {'system': {'switching': {'family': 'boxcar'}}},
    {'system': {'switching': {'family': 'polynomial', 'delta': -1.0}}},
    {'system': 3},
    {'geometry': {'family': 'hexagon'}},
    {'geometry': {'families': 'pair'}},
    {'sweep': {'axes': {'x_over_l': {'start': 1.0, 'stop': 2.0}}}},
    {'sweep': {'axes': {'x_over_l': {'start': 2.0, 'stop': 1.0, 'num': 3}}}},
    {'sweep': {'max_n': 2.5}},
    {'sweep': {'workers': 0}},
    {'sweep': {'trials': True}},
    {'sweep': {'switchings': {'family': 'truncated'}}},
])
def test_invalid_values(doc):
    with pytest.raises(ConfigError):
        parse_scenario(doc)


def test_load_errors(tmp_path):
    with pytest.raises(ConfigError, match='cannot read'):
        load_scenario(tmp_path / 'missing.yaml')
    bad = tmp_path / 'bad.yaml'
    bad.write_text('system: [1, 2\n')
    with pytest.raises(ConfigError, match='not valid YAML'):
        load_scenario(bad)
    listing = tmp_path / 'list.yaml'
    listing.write_text('- 1\n- 2\n')
    with pytest.raises(ConfigError):
        load_scenario(listing)


def test_load_round_trip(tmp_path):
    path = tmp_path / 'pair.yaml'
    path.write_text('system:\n  omega_t: 24.49\ngeometry:\n  family: pair\n  params: {x_over_l: 1.0}\n')
    config = load_scenario(path)
    assert config.system.omega_t == 24.49
    assert config.geometry.geometry().params == {'x_over_l': 1.0}


@pytest.mark.parametrize('path', sorted(glob.glob(os.path.join(SCENARIO_DIR, '*.yaml'))))
def test_shipped_scenarios_parse(path):
    config = load_scenario(path)
    assert config.output.path.startswith('results/')
