"""Feasible allocations from a dual solution, and the duality gap."""

import math
import time
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .dual import DualPoint, DualSolution, eval_dual, power_allocation_fixed
from .exceptions import InvalidInputError, SolverTimeoutError, WeakDualityError
from .model import DEFAULT_TOL_RATE, Allocation
from .monitoring import SolverLogger, get_logger
from .precompute import SetPrecompute
from .types import ProblemInstance, RecoveryParams

RecoveryStage = Literal["dual_candidate", "power_allocation", "mu_search", "not_found"]
BOUND_RTOL = 1e-6


@dataclass(frozen=True, eq=False)
class RecoveryResult:
    """A recovered allocation (``None`` when not found) and how it was reached."""

    allocation: Allocation | None
    stage: RecoveryStage
    assignments_tried: int

    @property
    def found(self) -> bool:
        return self.allocation is not None


def check_bound(objective: float, upper_bound: float, method: str) -> None:
    """Raise if a feasible objective lies above the dual upper bound.

    Raises:
        WeakDualityError: If ``objective > upper_bound (1 + 1e-6)``
    """
    if objective > upper_bound + BOUND_RTOL * abs(upper_bound):
        raise WeakDualityError(
            f"{method} objective {objective:.6g} exceeds the upper bound {upper_bound:.6g}"
        )


def gap_percent(upper: float, value: float) -> float:
    """Relative gap ``100 (upper - value) / upper`` in percent."""
    if not math.isfinite(upper) or upper <= 0:
        raise InvalidInputError(f"upper bound must be positive and finite, got {upper}")
    return 100.0 * (upper - value) / upper


def _short_users(alloc: Allocation, instance: ProblemInstance) -> list[int]:
    rates = alloc.per_user_rate
    return [
        k
        for k in instance.rt_users
        if rates[k] < instance.min_rates[k] * (1.0 - DEFAULT_TOL_RATE)
    ]


def recover_feasible(
    dsol: DualSolution,
    instance: ProblemInstance,
    pre: SetPrecompute,
    params: RecoveryParams | None = None,
    *,
    deadline: float | None = None,
    logger: SolverLogger | None = None,
) -> RecoveryResult:
    """Search for a feasible allocation near the dual solution.

    Stages, in order: the dual candidate itself; the exact power allocation
    for the candidate's SDMA sets; then a walk that raises ``mu`` of the
    users whose minimum rate is missed (``lam`` held fixed), re-solving the
    power allocation whenever the per-carrier set choice changes.

    Raises:
        InvalidInputError: If ``dsol`` was computed for another instance
        SolverTimeoutError: If ``deadline`` passes during the walk
        WeakDualityError: If the recovered objective exceeds the dual bound
    """
    params = params or RecoveryParams()
    logger = logger or get_logger()
    start = dsol.final if dsol.converged else dsol.best
    if len(start.point.mu) != instance.num_users or start.precompute is not pre:
        raise InvalidInputError("dual solution was computed for a different instance")

    def done(alloc: Allocation | None, stage: RecoveryStage, tried: int):
        if alloc is not None:
            check_bound(alloc.objective, dsol.upper_bound, "recovery")
        logger.log_recovery_event(
            stage=stage,
            success=alloc is not None,
            assignments_tried=tried,
            objective=None if alloc is None else alloc.objective,
        )
        return RecoveryResult(allocation=alloc, stage=stage, assignments_tried=tried)

    candidate = dsol.candidate
    if candidate.is_feasible:
        return done(candidate, "dual_candidate", 0)

    current = start.set_indices
    alloc = power_allocation_fixed(current, instance, pre)
    tried = 1
    if alloc.is_feasible:
        return done(alloc, "power_allocation", tried)

    step = params.resolved_mu_step(instance)
    lam = start.point.lam
    mu = start.point.mu_array()
    rt = list(instance.rt_users)
    for _ in range(params.max_outer):
        if deadline is not None and time.monotonic() > deadline:
            raise SolverTimeoutError(
                f"recovery exceeded its deadline after {tried} assignments"
            )
        short = _short_users(alloc, instance) or rt
        mu[short] += step
        ev = eval_dual(DualPoint(lam=lam, mu=tuple(mu.tolist())), pre, instance)
        if np.array_equal(ev.set_indices, current):
            continue
        current = ev.set_indices
        alloc = power_allocation_fixed(current, instance, pre)
        tried += 1
        if alloc.is_feasible:
            return done(alloc, "mu_search", tried)

    return done(None, "not_found", tried)
