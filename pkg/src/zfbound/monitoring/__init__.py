"""
Monitoring and observability for zfbound.

Provides structured logging and metrics collection for solver runs.
"""

from .logger import SolverLogger, configure_logging, get_logger
from .metrics import (
    MetricsCollector,
    MetricsTimer,
    configure_metrics,
    get_metrics_collector,
)

__all__ = [
    "SolverLogger",
    "get_logger",
    "configure_logging",
    "MetricsCollector",
    "MetricsTimer",
    "get_metrics_collector",
    "configure_metrics",
]
