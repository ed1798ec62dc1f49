import pytest

from udwharvest.errors import ConfigError
from udwharvest.resources import WORKERS_ENV, ResourceMeter, default_workers


def test_resource_meter_fields():
    with ResourceMeter('busy') as meter:
        total = sum(k * k for k in range(100_000))
    assert total > 0
    res = meter.results
    assert res['elapsed_ns'] > 0
    assert 'cpu_user' in res and 'cpu_system' in res
    assert res['ctx_voluntary'] >= 0
    assert set(res) >= {'mem_delta_bytes', 'peak_rss_bytes', 'ctx_involuntary'}


def test_default_workers(monkeypatch):
    monkeypatch.setenv(WORKERS_ENV, '3')
    assert default_workers() == 3
    monkeypatch.setenv(WORKERS_ENV, '')
    assert default_workers() >= 1
    monkeypatch.delenv(WORKERS_ENV)
    assert default_workers() >= 1
    for bad in ('zero', '0'):
        monkeypatch.setenv(WORKERS_ENV, bad)
        with pytest.raises(ConfigError):
            default_workers()
