import time
from contextlib import contextmanager
from typing import Dict, List

import psutil


class MetricsCollector:
    """Wall-clock timings of named solver stages plus process memory."""

    def __init__(self):
        self.start_time = time.perf_counter()
        self._process = psutil.Process()
        self._timings: Dict[str, List[float]] = {}

    def _format_bytes(self, n_bytes):
        if n_bytes < 1024**2:
            return f"{n_bytes / 1024:.1f}", "KB"
        elif n_bytes < 1024**3:
            return f"{n_bytes / 1024**2:.1f}", "MB"
        else:
            return f"{n_bytes / 1024**3:.1f}", "GB"

    @contextmanager
    def stage(self, name: str):
        started = time.perf_counter()
        try:
            yield
        finally:
            self.record(name, time.perf_counter() - started)

    def record(self, name: str, value: float):
        """Record a duration (seconds) under a stage name."""
        self._timings.setdefault(name, []).append(float(value))

    def get_metrics(self):
        rss = self._process.memory_info().rss
        rss_val, rss_unit = self._format_bytes(rss)
        return {
            "uptime_s": round(time.perf_counter() - self.start_time, 3),
            "memory": f"{rss_val}{rss_unit}",
            "stages": {
                name: {"calls": len(values), "total_s": round(sum(values), 6)}
                for name, values in sorted(self._timings.items())
            },
        }

    def reset(self):
        self._timings.clear()


metrics_collector = MetricsCollector()
