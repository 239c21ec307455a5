"""Weight-adjustment heuristic.

Drops the minimum-rate constraints and instead raises the weights of the
RT users that fall short, until a plain weighted sum-rate solution happens
to meet every minimum rate.
"""

import dataclasses
from dataclasses import dataclass

from .dual import DualPoint, power_allocation_fixed, solve_dual
from .model import Allocation, check_feasibility, penalty_objective
from .monitoring import SolverLogger, get_logger
from .precompute import SetPrecompute
from .types import ProblemInstance, SolverParams, WeightParams


@dataclass(frozen=True, eq=False)
class WeightResult:
    """Outcome of ``weight_adjust``.

    ``allocation`` is scored with the original weights; ``weights`` holds
    the inflated weights of every iteration, the last entry being final.
    ``penalties`` holds the linear-penalty objective of each iteration's
    allocation, which equals its objective once every minimum rate is met.
    """

    allocation: Allocation | None
    iterations: int
    weights: tuple[tuple[float, ...], ...]
    penalties: tuple[float, ...] = ()

    @property
    def found(self) -> bool:
        return self.allocation is not None

    @property
    def final_weights(self) -> tuple[float, ...]:
        return self.weights[-1]


def weight_adjust(
    instance: ProblemInstance,
    pre: SetPrecompute,
    params: WeightParams | None = None,
    solver: SolverParams | None = None,
    *,
    deadline: float | None = None,
    logger: SolverLogger | None = None,
) -> WeightResult:
    """Inflate RT weights with ``c'_k += epsilon (d_k - r_k)`` until rates are met."""
    params = params or WeightParams()
    solver = params.solver or solver or SolverParams()
    logger = logger or get_logger()

    current = list(instance.weights)
    history = [tuple(current)]
    penalties: list[float] = []
    warm: DualPoint | None = None
    for iteration in range(1, params.max_iterations + 1):
        relaxed = instance.relaxed(tuple(current))
        dsol = solve_dual(
            relaxed, pre, solver, initial=warm, deadline=deadline, logger=logger
        )
        warm = DualPoint.start(dsol.best_point.lam, instance.num_users)
        chosen = dsol.primal or (dsol.final if dsol.converged else dsol.best)
        alloc = power_allocation_fixed(chosen.set_indices, relaxed, pre).rescored(
            instance
        )
        penalties.append(penalty_objective(alloc, instance, params.epsilon))
        flags = check_feasibility(alloc, instance, pre.channels)
        if flags.ok:
            logger.debug(
                "Weight adjustment met all minimum rates",
                iterations=iteration,
                objective=alloc.objective,
            )
            return WeightResult(
                allocation=dataclasses.replace(alloc, feasible=flags),
                iterations=iteration,
                weights=tuple(history),
                penalties=tuple(penalties),
            )

        rates = alloc.per_user_rate
        for k in instance.rt_users:
            if rates[k] < instance.min_rates[k]:
                current[k] += params.epsilon * (instance.min_rates[k] - rates[k])
        history.append(tuple(current))

    logger.info(
        "Weight adjustment gave up",
        iterations=params.max_iterations,
        final_weights=[float(c) for c in current],
        final_penalty=penalties[-1],
    )
    return WeightResult(
        allocation=None,
        iterations=params.max_iterations,
        weights=tuple(history),
        penalties=tuple(penalties),
    )
