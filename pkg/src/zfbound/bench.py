"""
Monte Carlo experiment harness.

``run_scenario`` solves every realization of every sweep point with each
method (dual bound, recovery, weight adjustment, and the oracle when
enabled), then averages objectives and gaps over the feasible cases.
Realization ``r`` uses the same channel draws at every sweep point.
"""

import json
import math
import platform
import time
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
import pydantic
import scipy
from rich.console import Console
from rich.table import Table

from . import __version__
from .dual import DualPoint, eval_dual, solve_dual, write_trace
from .exceptions import InvalidInputError, SolverTimeoutError, ZFBoundError
from .model import generate_channels
from .monitoring import MetricsCollector, MetricsTimer, get_logger, get_metrics_collector
from .oracle import exact_enumeration
from .precompute import SetPrecompute, enumerate_sdma_sets, precompute_all
from .recovery import check_bound, gap_percent, recover_feasible
from .types import ProblemInstance, ScenarioConfig
from .weights import weight_adjust

METHODS = ("dual", "recovery", "weight_adjust", "oracle")

SUMMARY_COLUMNS = [
    "sweep_value",
    "method",
    "mean_objective",
    "mean_gap_percent",
    "feasible_count",
    "mean_iterations",
    "mean_wall_ms",
    "realizations",
]


@dataclass
class RealizationOutcome:
    """Rows for one realization plus the worker's metrics snapshot."""

    rows: list[dict[str, Any]]
    metrics: dict[str, Any] = field(default_factory=dict)


@dataclass
class RunReport:
    """Per-realization records and their aggregate over the sweep."""

    config: ScenarioConfig
    records: pd.DataFrame
    summary: pd.DataFrame
    metrics: dict[str, Any]
    run_id: str
    started_at: str
    elapsed_s: float

    def manifest(self) -> dict[str, Any]:
        return {
            "run_id": self.run_id,
            "started_at": self.started_at,
            "elapsed_s": self.elapsed_s,
            "seed": self.config.seed,
            "realizations": self.config.realizations,
            "config": self.config.model_dump(mode="json"),
            "versions": package_versions(),
            "metrics": self.metrics,
        }

    def write(self, out_dir: str | Path) -> dict[str, Path]:
        """Write ``summary.csv``, ``records.csv`` and ``manifest.json``."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {
            "summary": out / "summary.csv",
            "records": out / "records.csv",
            "manifest": out / "manifest.json",
        }
        self.summary.to_csv(paths["summary"], index=False, float_format="%.6f")
        self.records.to_csv(paths["records"], index=False, float_format="%.6f")
        paths["manifest"].write_text(
            json.dumps(self.manifest(), indent=2, default=str), encoding="utf-8"
        )
        return paths

    def render(self, console: Console | None = None) -> None:
        """Print the summary as a table."""
        console = console or Console()
        parameter = self.config.sweep.parameter
        table = Table(show_header=True, header_style="bold cyan")
        table.add_column(parameter if parameter != "none" else "point", justify="right")
        table.add_column("Method")
        table.add_column("Mean objective", justify="right")
        table.add_column("Mean gap %", justify="right")
        table.add_column("Feasible", justify="right")
        table.add_column("Mean iters", justify="right")
        table.add_column("Mean ms", justify="right")
        for row in self.summary.itertuples(index=False):
            table.add_row(
                "-" if pd.isna(row.sweep_value) else f"{row.sweep_value:g}",
                row.method,
                _fmt(row.mean_objective),
                _fmt(row.mean_gap_percent),
                f"{row.feasible_count}/{row.realizations}",
                _fmt(row.mean_iterations, ".0f"),
                _fmt(row.mean_wall_ms, ".1f"),
            )
        console.print(table)


def _fmt(value: float, spec: str = ".3f") -> str:
    return "-" if pd.isna(value) else format(value, spec)


def package_versions() -> dict[str, str]:
    return {
        "zfbound": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
        "pydantic": pydantic.VERSION,
    }


def prepare_realization(
    config: ScenarioConfig, realization: int
) -> tuple[ProblemInstance, SetPrecompute]:
    """Instance, channels and beam precompute for one realization."""
    instance = config.instance.to_instance()
    channels = generate_channels(config, realization)
    sets = enumerate_sdma_sets(instance.num_users, instance.num_antennas)
    return instance, precompute_all(channels, sets)


def _row(
    point: int,
    sweep_value: float | None,
    realization: int,
    method: str,
    status: str,
    objective: float | None = None,
    upper_bound: float = math.nan,
    iterations: int = 0,
    wall_ms: float = math.nan,
    detail: str = "",
) -> dict[str, Any]:
    feasible = objective is not None and math.isfinite(objective)
    gap = math.nan
    if feasible and math.isfinite(upper_bound) and upper_bound > 0:
        gap = gap_percent(upper_bound, objective)
    return {
        "point": point,
        "sweep_value": math.nan if sweep_value is None else sweep_value,
        "realization": realization,
        "method": method,
        "status": status,
        "feasible": feasible,
        "objective": objective if feasible else math.nan,
        "upper_bound": upper_bound,
        "gap_percent": gap,
        "iterations": iterations,
        "wall_ms": wall_ms,
        "detail": detail,
    }


def run_realization(
    config: ScenarioConfig,
    realization: int,
    point: int = 0,
    sweep_value: float | None = None,
    trace_dir: Path | None = None,
) -> RealizationOutcome:
    """Run every enabled method on one realization of one sweep point."""
    logger = get_logger()
    logger.set_run_context(realization=realization)
    collector = MetricsCollector()
    instance, pre = prepare_realization(config, realization)
    deadline = (
        time.monotonic() + config.timeout_s if config.timeout_s is not None else None
    )
    methods = [m for m in METHODS if m != "oracle" or config.oracle.enabled]
    rows: list[dict[str, Any]] = []
    upper = math.nan

    def finish(method: str, status: str, **kwargs: Any) -> None:
        row = _row(point, sweep_value, realization, method, status, **kwargs)
        rows.append(row)
        logger.log_realization_event(
            sweep_value=sweep_value,
            method=method,
            status=status,
            objective=None if not row["feasible"] else row["objective"],
            duration_ms=row["wall_ms"],
            error=kwargs.get("detail") if status == "failed" else None,
        )

    for method in methods:
        timer = MetricsTimer(collector, method)
        try:
            with timer:
                if method == "dual":
                    dsol = solve_dual(instance, pre, config.solver, deadline=deadline)
                    timer.iterations = dsol.iterations
                    upper = dsol.upper_bound
                    result: tuple[float | None, int, str] = (
                        upper,
                        dsol.iterations,
                        "converged" if dsol.converged else "iteration_limit",
                    )
                    if trace_dir is not None:
                        label = "none" if sweep_value is None else f"{sweep_value:g}"
                        write_trace(dsol.trace, trace_dir / f"trace_{label}_r{realization}.csv")
                elif method == "recovery":
                    rec = recover_feasible(
                        dsol, instance, pre, config.recovery, deadline=deadline
                    )
                    obj = rec.allocation.objective if rec.allocation else None
                    result = (obj, rec.assignments_tried, rec.stage)
                elif method == "weight_adjust":
                    wres = weight_adjust(
                        instance, pre, config.weights, config.solver, deadline=deadline
                    )
                    obj = wres.allocation.objective if wres.allocation else None
                    result = (obj, wres.iterations, "")
                else:
                    ores = exact_enumeration(
                        instance, pre, config.oracle, deadline=deadline
                    )
                    obj = ores.allocation.objective if ores.allocation else None
                    result = (obj, ores.assignments_examined, "")
                if method != "dual" and result[0] is not None:
                    check_bound(result[0], upper, method)
                timer.status = "ok" if result[0] is not None else "not_found"
        except SolverTimeoutError as e:
            for rest in methods[methods.index(method) :]:
                finish(rest, "timed_out", upper_bound=upper, detail=e.message)
            collector.record_realization("timed_out")
            return RealizationOutcome(rows=rows, metrics=collector.raw_snapshot())
        except ZFBoundError as e:
            finish(method, "failed", upper_bound=upper, detail=e.message)
            if method == "dual":
                for rest in methods[1:]:
                    finish(rest, "failed", detail="dual solve failed")
                collector.record_realization("failed")
                return RealizationOutcome(rows=rows, metrics=collector.raw_snapshot())
            continue

        objective, iterations, detail = result
        finish(
            method,
            timer.status,
            objective=objective,
            upper_bound=upper,
            iterations=iterations,
            wall_ms=timer.elapsed * 1000,
            detail=detail,
        )

    collector.record_realization("ok")
    return RealizationOutcome(rows=rows, metrics=collector.raw_snapshot())


def _run_task(task: tuple) -> RealizationOutcome:
    return run_realization(*task)


def summarize(records: pd.DataFrame) -> pd.DataFrame:
    """Aggregate per (sweep point, method); objectives and gaps over feasible cases."""
    if records.empty:
        return pd.DataFrame(columns=SUMMARY_COLUMNS)
    keys = ["point", "method"]
    overall = records.groupby(keys, sort=False).agg(
        sweep_value=("sweep_value", "first"),
        mean_iterations=("iterations", "mean"),
        mean_wall_ms=("wall_ms", "mean"),
        realizations=("realization", "count"),
    )
    feasible = records[records["feasible"]].groupby(keys, sort=False).agg(
        mean_objective=("objective", "mean"),
        mean_gap_percent=("gap_percent", "mean"),
        feasible_count=("realization", "count"),
    )
    summary = overall.join(feasible).reset_index()
    summary["feasible_count"] = summary["feasible_count"].fillna(0).astype(int)
    summary["method"] = pd.Categorical(summary["method"], categories=METHODS, ordered=True)
    summary = summary.sort_values(["point", "method"], kind="stable")
    summary["method"] = summary["method"].astype(str)
    return summary[SUMMARY_COLUMNS].reset_index(drop=True)


def run_scenario(
    config: ScenarioConfig, trace_dir: str | Path | None = None
) -> RunReport:
    """Run the Monte Carlo sweep described by ``config``.

    Args:
        config: Scenario; ``threads > 1`` spreads realizations over processes
        trace_dir: Where to write per-realization solver traces when
            ``config.emit_trace`` is set
    """
    logger = get_logger()
    run_id = logger.generate_run_id()
    started_at = datetime.now(timezone.utc).isoformat()
    started = time.perf_counter()

    traces = Path(trace_dir) if (config.emit_trace and trace_dir is not None) else None
    if traces is not None:
        traces.mkdir(parents=True, exist_ok=True)

    tasks = []
    for point, value in enumerate(config.sweep.points()):
        point_config = config.model_copy(
            update={"instance": config.sweep.apply(config.instance, value)}
        )
        for r in range(config.realizations):
            tasks.append((point_config, r, point, value, traces))

    logger.info(
        "Scenario started",
        sweep=config.sweep.parameter,
        points=len(config.sweep.points()),
        realizations=config.realizations,
        threads=config.threads,
    )
    if config.threads > 1:
        with ProcessPoolExecutor(max_workers=config.threads) as pool:
            outcomes = list(pool.map(_run_task, tasks))
    else:
        outcomes = [_run_task(task) for task in tasks]

    collector = get_metrics_collector()
    for outcome in outcomes:
        collector.merge(outcome.metrics)
    records = pd.DataFrame([row for outcome in outcomes for row in outcome.rows])
    summary = summarize(records)
    elapsed = time.perf_counter() - started
    logger.info("Scenario finished", elapsed_s=round(elapsed, 3))
    return RunReport(
        config=config,
        records=records,
        summary=summary,
        metrics=collector.get_metrics_dict(),
        run_id=run_id,
        started_at=started_at,
        elapsed_s=elapsed,
    )


def scan_dual(
    config: ScenarioConfig,
    lambdas: Sequence[float] | None = None,
    mus: Sequence[float] = (0.0,),
    *,
    realization: int = 0,
    user: int | None = None,
) -> pd.DataFrame:
    """Dual function on a ``lam x mu`` grid for one realization.

    ``mu`` is applied to ``user`` (default: the first RT user, else user 0)
    and every other multiplier is zero. Without ``lambdas`` the grid uses
    the power price found by ``solve_dual``.
    """
    instance, pre = prepare_realization(config, realization)
    if user is None:
        user = instance.rt_users[0] if instance.rt_users else 0
    if not 0 <= user < instance.num_users:
        raise InvalidInputError(f"user {user} out of range for K={instance.num_users}")
    if lambdas is None:
        lambdas = [solve_dual(instance, pre, config.solver).best_point.lam]

    rows = []
    for lam in lambdas:
        for mu_value in mus:
            mu = [0.0] * instance.num_users
            mu[user] = float(mu_value)
            ev = eval_dual(DualPoint(lam=float(lam), mu=tuple(mu)), pre, instance)
            rows.append(
                {
                    "lam": float(lam),
                    "mu": float(mu_value),
                    "user": user,
                    "theta": ev.theta,
                    "g_lambda": ev.g_lambda,
                    "user_rate": float(ev.rates[user].sum()),
                    "total_power": ev.total_power,
                }
            )
    return pd.DataFrame(rows)
