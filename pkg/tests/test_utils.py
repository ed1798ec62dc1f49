import json
import os

import pytest

from udwharvest.utils import PROFILE_DIR_ENV, FunctionProfiler, clear_profiles, get_profiles, spool_profiles, timed_profile


@timed_profile
def _traced(x):
    return x + 1


@timed_profile
def _fails():
    raise RuntimeError('boom')


def _record(name):
    return next(r for r in get_profiles() if r['func_name'] == name)


def test_profile_counts_calls(monkeypatch):
    monkeypatch.delenv(PROFILE_DIR_ENV, raising=False)
    clear_profiles()
    for x in range(3):
        assert _traced(x) == x + 1
    rec = _record('_traced')
    assert rec['call_count'] == 3
    assert rec['elapsed_ns'] >= 0
    # failed calls are timed too
    with pytest.raises(RuntimeError):
        _fails()
    assert _record('_fails')['call_count'] == 1
    clear_profiles()
    assert get_profiles() == []


def test_spool_and_merge(tmp_path, monkeypatch):
    monkeypatch.setenv(PROFILE_DIR_ENV, str(tmp_path))
    clear_profiles()
    _traced(1)
    spool_profiles()
    files = os.listdir(tmp_path)
    assert len(files) == 1
    with open(tmp_path / files[0]) as f:
        assert json.load(f)[0]['func_name'] == '_traced'
    _traced(2)
    assert _record('_traced')['call_count'] == 2
    # unreadable spool files are skipped
    (tmp_path / 'junk.json').write_text('{not json')
    assert _record('_traced')['call_count'] == 2
    clear_profiles()
    assert os.listdir(tmp_path) == []


def test_spool_without_directory_keeps_records(monkeypatch):
    monkeypatch.delenv(PROFILE_DIR_ENV, raising=False)
    clear_profiles()
    _traced(0)
    FunctionProfiler.spool()
    assert _record('_traced')['call_count'] == 1
    clear_profiles()
