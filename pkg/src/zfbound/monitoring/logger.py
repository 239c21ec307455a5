"""
Structured logging for zfbound.

Solver progress, recovery stages and per-realization outcomes go through one
structured logger so that a sweep can be followed live on the console or
collected as JSON lines.
"""

import json
import logging
import time
from contextvars import ContextVar
from typing import Any
from uuid import uuid4

try:
    import structlog  # type: ignore

    STRUCTLOG_AVAILABLE = True
except ImportError:
    STRUCTLOG_AVAILABLE = False

# Context variables for run tracing
run_id: ContextVar[str | None] = ContextVar("run_id")
realization_id: ContextVar[int | None] = ContextVar("realization_id")


class SolverLogger:
    """
    Structured logger for the solvers with run context.

    Every event carries the run identifier and, inside a Monte Carlo loop,
    the realization being solved.
    """

    def __init__(
        self,
        logger_name: str = "zfbound",
        log_level: str = "WARNING",
        output_format: str = "console",  # json, console
        enable_metrics: bool = True,
    ):
        self.logger_name = logger_name
        self.enable_metrics = enable_metrics

        if STRUCTLOG_AVAILABLE:
            processors = [
                self._add_timestamp,
                self._add_context,
                structlog.stdlib.filter_by_level,
                structlog.stdlib.add_logger_name,
                structlog.stdlib.add_log_level,
                structlog.stdlib.PositionalArgumentsFormatter(),
                structlog.processors.StackInfoRenderer(),
                structlog.processors.format_exc_info,
            ]

            if output_format == "json":
                processors.append(structlog.processors.JSONRenderer())
            else:
                processors.append(structlog.dev.ConsoleRenderer(colors=False))

            structlog.configure(
                processors=processors,
                wrapper_class=structlog.stdlib.BoundLogger,
                logger_factory=structlog.stdlib.LoggerFactory(),
                cache_logger_on_first_use=True,
            )
            self.logger = structlog.get_logger(logger_name)
        else:
            self.logger = logging.getLogger(logger_name)

        logging.basicConfig(level=getattr(logging, log_level.upper()))
        logging.getLogger(logger_name).setLevel(getattr(logging, log_level.upper()))

        self._metrics: dict[str, dict[str, int]] = {}

    @staticmethod
    def _add_timestamp(logger, method_name, event_dict):
        event_dict["timestamp"] = time.time()
        return event_dict

    @staticmethod
    def _add_context(logger, method_name, event_dict):
        rid = run_id.get(None)
        if rid:
            event_dict["run_id"] = rid
        real = realization_id.get(None)
        if real is not None:
            event_dict["realization"] = real
        return event_dict

    def set_run_context(
        self, rid: str | None = None, realization: int | None = None
    ) -> None:
        """Set run context for logging."""
        if rid:
            run_id.set(rid)
        if realization is not None:
            realization_id.set(realization)

    def generate_run_id(self) -> str:
        """Generate a new run ID and set it in context."""
        rid = uuid4().hex[:12]
        run_id.set(rid)
        return rid

    def _emit(self, level: str, message: str, **kwargs: Any) -> None:
        if STRUCTLOG_AVAILABLE:
            getattr(self.logger, level)(message, **kwargs)
        else:
            extra_info = " ".join(f"{k}={v}" for k, v in kwargs.items())
            getattr(self.logger, level)(f"{message} {extra_info}".strip())

    def info(self, message: str, **kwargs: Any) -> None:
        self._emit("info", message, **kwargs)

    def warning(self, message: str, **kwargs: Any) -> None:
        self._emit("warning", message, **kwargs)

    def error(self, message: str, **kwargs: Any) -> None:
        self._emit("error", message, **kwargs)
        if self.enable_metrics:
            self._increment_metric(
                "errors", {"error_type": kwargs.get("error_type", "unknown")}
            )

    def debug(self, message: str, **kwargs: Any) -> None:
        self._emit("debug", message, **kwargs)

    def is_debug_enabled(self) -> bool:
        return logging.getLogger(self.logger_name).isEnabledFor(logging.DEBUG)

    def log_dual_iteration(
        self,
        iteration: int,
        theta: float,
        lam: float,
        g_lambda: float,
        g_mu_norm: float,
    ) -> None:
        """Log one subgradient iteration (debug level)."""
        self.debug(
            "Dual iteration",
            event_type="dual_iteration",
            iteration=iteration,
            theta=float(theta),
            lam=float(lam),
            g_lambda=float(g_lambda),
            g_mu_norm=float(g_mu_norm),
        )

    def log_solver_event(
        self,
        solver: str,
        converged: bool,
        iterations: int,
        duration_ms: float | None = None,
        **metadata: Any,
    ) -> None:
        """Log the end of a dual solve."""
        event_data = {
            "event_type": "solver",
            "solver": solver,
            "converged": converged,
            "iterations": iterations,
            "duration_ms": duration_ms,
            **metadata,
        }
        if converged:
            self.debug("Dual solve converged", **event_data)
        else:
            self.debug("Dual solve hit the iteration limit", **event_data)

        if self.enable_metrics:
            self._increment_metric(
                "dual_solves", {"solver": solver, "converged": converged}
            )

    def log_recovery_event(
        self, stage: str, success: bool, assignments_tried: int, **metadata: Any
    ) -> None:
        """Log which recovery stage produced (or failed to produce) a point."""
        event_data = {
            "event_type": "recovery",
            "stage": stage,
            "success": success,
            "assignments_tried": assignments_tried,
            **metadata,
        }
        if success:
            self.debug("Feasible allocation recovered", **event_data)
        else:
            self.info("Recovery found no feasible allocation", **event_data)

        if self.enable_metrics:
            self._increment_metric("recoveries", {"stage": stage, "success": success})

    def log_realization_event(
        self,
        sweep_value: float | None,
        method: str,
        status: str,
        objective: float | None = None,
        duration_ms: float | None = None,
        error: str | None = None,
    ) -> None:
        """Log the outcome of one method on one channel realization."""
        event_data = {
            "event_type": "realization",
            "sweep_value": sweep_value,
            "method": method,
            "status": status,
            "objective": objective,
            "duration_ms": duration_ms,
        }
        if error:
            event_data["error"] = error
            self.warning("Realization failed", **event_data)
        else:
            self.debug("Realization solved", **event_data)

        if self.enable_metrics:
            self._increment_metric("realizations", {"method": method, "status": status})

    def _increment_metric(self, metric_name: str, labels: dict[str, Any]) -> None:
        if not self.enable_metrics:
            return
        bucket = self._metrics.setdefault(metric_name, {})
        label_key = json.dumps(labels, sort_keys=True)
        bucket[label_key] = bucket.get(label_key, 0) + 1

    def get_metrics(self) -> dict[str, dict[str, int]]:
        """Get current event counts."""
        return {name: dict(counts) for name, counts in self._metrics.items()}

    def reset_metrics(self) -> None:
        self._metrics.clear()


# Global logger instance
_logger: SolverLogger | None = None


def get_logger() -> SolverLogger:
    """Get the global zfbound logger instance."""
    global _logger
    if _logger is None:
        _logger = SolverLogger()
    return _logger


def configure_logging(
    log_level: str = "WARNING",
    output_format: str = "console",
    enable_metrics: bool = True,
) -> SolverLogger:
    """Configure global logging for zfbound."""
    global _logger
    _logger = SolverLogger(
        log_level=log_level,
        output_format=output_format,
        enable_metrics=enable_metrics,
    )
    return _logger
