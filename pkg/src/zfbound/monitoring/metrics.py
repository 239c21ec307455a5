"""
Metrics collection and export for zfbound.

Counts solves and realizations and times them, in memory by default and
through Prometheus when the ``monitoring`` extra is installed.
"""

import time
from typing import Any

try:
    from prometheus_client import (  # type: ignore
        CollectorRegistry,
        Counter,
        Histogram,
        generate_latest,
    )

    PROMETHEUS_AVAILABLE = True
except ImportError:
    PROMETHEUS_AVAILABLE = False


class MetricsCollector:
    """
    Metrics collector with optional Prometheus integration.

    The in-memory view (``get_metrics_dict``) is always kept so it can be
    embedded in the run manifest.
    """

    def __init__(self, enable_prometheus: bool = False, registry: object | None = None):
        self.enable_prometheus = enable_prometheus and PROMETHEUS_AVAILABLE
        self.registry = registry or (
            CollectorRegistry() if PROMETHEUS_AVAILABLE else None
        )

        self._counters: dict[str, int] = {}
        self._histograms: dict[str, list[float]] = {}

        if self.enable_prometheus:
            self._init_prometheus_metrics()

    def _init_prometheus_metrics(self) -> None:
        if not PROMETHEUS_AVAILABLE:
            return

        self.solves_total = Counter(
            "zfbound_solves_total",
            "Total number of solver runs",
            ["method", "status"],
            registry=self.registry,
        )
        self.solve_duration_seconds = Histogram(
            "zfbound_solve_duration_seconds",
            "Time spent in one solver run",
            ["method"],
            registry=self.registry,
        )
        self.dual_iterations_total = Counter(
            "zfbound_dual_iterations_total",
            "Subgradient iterations performed",
            ["method"],
            registry=self.registry,
        )
        self.realizations_total = Counter(
            "zfbound_realizations_total",
            "Channel realizations processed",
            ["outcome"],
            registry=self.registry,
        )

    def _observe(self, key: str, value: float) -> None:
        self._histograms.setdefault(key, []).append(value)

    def _count(self, key: str, amount: int = 1) -> None:
        self._counters[key] = self._counters.get(key, 0) + amount

    def record_solve(
        self, method: str, status: str, duration_seconds: float, iterations: int = 0
    ) -> None:
        """Record one solver run on one realization."""
        if self.enable_prometheus:
            self.solves_total.labels(method=method, status=status).inc()
            self.solve_duration_seconds.labels(method=method).observe(duration_seconds)
            if iterations:
                self.dual_iterations_total.labels(method=method).inc(iterations)
        self._count(f"solves_{method}_{status}")
        if iterations:
            self._count(f"dual_iterations_{method}", iterations)
        self._observe(f"solve_duration_{method}", duration_seconds)

    def record_realization(self, outcome: str) -> None:
        """Record a realization as ``ok``, ``failed`` or ``timed_out``."""
        if self.enable_prometheus:
            self.realizations_total.labels(outcome=outcome).inc()
        self._count(f"realizations_{outcome}")

    def merge(self, other: dict[str, Any]) -> None:
        """Fold in a raw snapshot (``raw_snapshot``) taken in a worker process."""
        for key, value in other.get("counters", {}).items():
            self._count(key, value)
        for key, values in other.get("histograms", {}).items():
            self._histograms.setdefault(key, []).extend(values)

    def raw_snapshot(self) -> dict[str, Any]:
        return {
            "counters": dict(self._counters),
            "histograms": {k: list(v) for k, v in self._histograms.items()},
        }

    def get_metrics_text(self) -> str:
        """Get metrics in Prometheus text format."""
        if self.enable_prometheus:
            return generate_latest(self.registry).decode("utf-8")
        lines = [f"zfbound_{key} {value}" for key, value in self._counters.items()]
        for key, values in self._histograms.items():
            if values:
                lines.append(f"zfbound_{key}_avg {sum(values) / len(values)}")
                lines.append(f"zfbound_{key}_count {len(values)}")
        return "\n".join(lines)

    def get_metrics_dict(self) -> dict[str, Any]:
        """Get metrics as a dictionary."""
        histogram_stats = {
            key: {
                "count": len(values),
                "avg": sum(values) / len(values),
                "min": min(values),
                "max": max(values),
            }
            for key, values in self._histograms.items()
            if values
        }
        return {"counters": self._counters.copy(), "histograms": histogram_stats}

    def reset_metrics(self) -> None:
        self._counters.clear()
        self._histograms.clear()


class MetricsTimer:
    """Context manager timing one solver run."""

    def __init__(self, metrics_collector: MetricsCollector, method: str):
        self.metrics_collector = metrics_collector
        self.method = method
        self.start_time: float | None = None
        self.status = "ok"
        self.iterations = 0

    @property
    def elapsed(self) -> float:
        if self.start_time is None:
            return 0.0
        return time.perf_counter() - self.start_time

    def __enter__(self) -> "MetricsTimer":
        self.start_time = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        if self.start_time is None:
            return
        status = self.status if exc_type is None else "error"
        self.metrics_collector.record_solve(
            method=self.method,
            status=status,
            duration_seconds=self.elapsed,
            iterations=self.iterations,
        )


# Global metrics collector
_metrics_collector: MetricsCollector | None = None


def get_metrics_collector() -> MetricsCollector:
    """Get the global metrics collector."""
    global _metrics_collector
    if _metrics_collector is None:
        _metrics_collector = MetricsCollector()
    return _metrics_collector


def configure_metrics(enable_prometheus: bool = False) -> MetricsCollector:
    """Configure global metrics collection."""
    global _metrics_collector
    _metrics_collector = MetricsCollector(enable_prometheus=enable_prometheus)
    return _metrics_collector
