import os
import time
import warnings

import psutil

from .errors import ConfigError

try:
    import resource
except ImportError:  # windows
    resource = None

WORKERS_ENV = 'UDWHARVEST_WORKERS'


def default_workers() -> int:
    """Worker count from UDWHARVEST_WORKERS, else the number of physical cores."""
    raw = os.environ.get(WORKERS_ENV)
    if raw is None or raw.strip() == '':
        return psutil.cpu_count(logical=False) or 1
    try:
        workers = int(raw)
    except ValueError:
        raise ConfigError(f'{WORKERS_ENV} must be an integer, got {raw!r}') from None
    if workers < 1:
        raise ConfigError(f'{WORKERS_ENV} must be at least 1, got {workers}')
    return workers


def _peak_rss(proc: psutil.Process):
    mem = proc.memory_info()
    peak = getattr(mem, 'peak_wset', None)
    if peak is not None:
        return int(peak)
    if resource is not None:
        # ru_maxrss is in kilobytes on linux
        return int(resource.getrusage(resource.RUSAGE_SELF).ru_maxrss) * 1024
    return None


class ResourceMeter:
    """Context manager for process CPU time, memory and context switches."""
    def __init__(self, name: str):
        self.name = name
        self._proc = psutil.Process()
        self._results = {}

    def __enter__(self):
        self._cpu_before = self._proc.cpu_times()
        self._rss_before = self._proc.memory_info().rss
        self._ctx_before = self._proc.num_ctx_switches()
        self._start_ns = time.perf_counter_ns()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed_ns = time.perf_counter_ns() - self._start_ns
        cpu_after = self._proc.cpu_times()
        ctx_after = self._proc.num_ctx_switches()
        results = {'elapsed_ns': elapsed_ns}
        for f in cpu_after._fields:
            results[f'cpu_{f}'] = getattr(cpu_after, f) - getattr(self._cpu_before, f)
        results['mem_delta_bytes'] = self._proc.memory_info().rss - self._rss_before
        results['peak_rss_bytes'] = _peak_rss(self._proc)
        results['ctx_voluntary'] = ctx_after.voluntary - self._ctx_before.voluntary
        results['ctx_involuntary'] = ctx_after.involuntary - self._ctx_before.involuntary
        cpu_total = sum(v for k, v in results.items() if k.startswith('cpu_'))
        if cpu_total == 0.0 and elapsed_ns > 50_000_000:
            warnings.warn(f"CPU time for '{self.name}' was 0.0 s over {elapsed_ns / 1e9:.3g} s", UserWarning)
        self._results = results

    @property
    def results(self) -> dict:
        return dict(self._results)
