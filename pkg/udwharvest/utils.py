import functools
import glob
import json
import os
import threading
import time
import uuid

from loguru import logger

PROFILE_DIR_ENV = 'UDWHARVEST_PROFILE_DIR'


class FunctionProfiler:
    """
    Aggregates call counts and elapsed time per decorated function.
    Records live in memory; spawn workers spool theirs as JSON into the
    directory named by UDWHARVEST_PROFILE_DIR so the parent can merge them.
    """
    _records = {}
    _lock = threading.Lock()

    @staticmethod
    def _get_profile_dir():
        return os.environ.get(PROFILE_DIR_ENV)

    @classmethod
    def profile(cls, func):
        """Decorator: adds one call and its elapsed time to the function's record."""
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            start_ns = time.perf_counter_ns()
            try:
                return func(*args, **kwargs)
            finally:
                elapsed = time.perf_counter_ns() - start_ns
                with cls._lock:
                    rec = cls._records.setdefault(func.__qualname__, [0, 0])
                    rec[0] += 1
                    rec[1] += elapsed
        return wrapper

    @classmethod
    def spool(cls):
        """Moves in-memory records to the profile directory, if one is configured."""
        profile_dir = cls._get_profile_dir()
        if not profile_dir:
            return
        with cls._lock:
            records = [{'func_name': k, 'call_count': v[0], 'elapsed_ns': v[1]}
                       for k, v in cls._records.items()]
            cls._records.clear()
        if not records:
            return
        fpath = os.path.join(profile_dir, f"prof_{os.getpid()}_{uuid.uuid4().hex}.json")
        try:
            with open(fpath, 'w') as f:
                json.dump(records, f)
        except OSError as e:
            logger.warning(f"Could not write profile records to {fpath}: {e}")

    @classmethod
    def get_records(cls):
        """Memory and spooled records merged into one list, one entry per function."""
        with cls._lock:
            merged = {k: list(v) for k, v in cls._records.items()}
        profile_dir = cls._get_profile_dir()
        if profile_dir:
            for fpath in glob.glob(os.path.join(profile_dir, "*.json")):
                try:
                    with open(fpath) as f:
                        spooled = json.load(f)
                except (OSError, json.JSONDecodeError):
                    continue
                for rec in spooled:
                    acc = merged.setdefault(rec['func_name'], [0, 0])
                    acc[0] += rec['call_count']
                    acc[1] += rec['elapsed_ns']
        return [{'func_name': k, 'call_count': v[0], 'elapsed_ns': v[1]}
                for k, v in sorted(merged.items())]

    @classmethod
    def clear(cls):
        with cls._lock:
            cls._records.clear()
        profile_dir = cls._get_profile_dir()
        if profile_dir:
            for fpath in glob.glob(os.path.join(profile_dir, "*.json")):
                try:
                    os.remove(fpath)
                except OSError:
                    continue


timed_profile = FunctionProfiler.profile
spool_profiles = FunctionProfiler.spool
get_profiles = FunctionProfiler.get_records
clear_profiles = FunctionProfiler.clear
