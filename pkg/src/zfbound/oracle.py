"""Exhaustive search over SDMA assignments for small instances."""

import itertools
import math
import time
from dataclasses import dataclass

import numpy as np

from .dual import power_allocation_fixed
from .exceptions import BudgetExceededError, SolverTimeoutError
from .model import Allocation
from .monitoring import SolverLogger, get_logger
from .precompute import SetPrecompute
from .types import OracleParams, ProblemInstance


@dataclass(frozen=True, eq=False)
class OracleResult:
    allocation: Allocation | None
    assignments_examined: int

    @property
    def found(self) -> bool:
        return self.allocation is not None


def count_assignments(pre: SetPrecompute) -> int:
    """Number of assignment vectors: product of usable sets per subcarrier."""
    return math.prod(pre.usable_counts())


def exact_enumeration(
    instance: ProblemInstance,
    pre: SetPrecompute,
    params: OracleParams | None = None,
    *,
    deadline: float | None = None,
    logger: SolverLogger | None = None,
) -> OracleResult:
    """Best feasible allocation over every per-subcarrier choice of usable set.

    Each assignment's powers come from the exact fixed-assignment solve, so
    the result is optimal within zero-forcing with pseudo-inverse beams.
    Ties keep the first assignment in enumeration order.

    Raises:
        BudgetExceededError: If the assignment count exceeds the budget
        SolverTimeoutError: If ``deadline`` passes during the search
    """
    params = params or OracleParams()
    logger = logger or get_logger()
    total = count_assignments(pre)
    if total > params.assignment_budget:
        raise BudgetExceededError(
            f"{total} assignments exceed the budget of {params.assignment_budget}"
        )

    choices = [np.flatnonzero(pre.usable[n]) for n in range(pre.num_subcarriers)]
    best: Allocation | None = None
    examined = 0
    for combo in itertools.product(*choices):
        if deadline is not None and examined % 64 == 0 and time.monotonic() > deadline:
            raise SolverTimeoutError(
                f"enumeration exceeded its deadline after {examined} of {total} assignments"
            )
        alloc = power_allocation_fixed(np.array(combo, dtype=np.int64), instance, pre)
        examined += 1
        if alloc.is_feasible and (best is None or alloc.objective > best.objective):
            best = alloc

    logger.debug(
        "Enumeration finished",
        assignments=examined,
        found=best is not None,
        objective=None if best is None else best.objective,
    )
    return OracleResult(allocation=best, assignments_examined=examined)
