"""
Lagrangian dual of the zero-forcing scheduling problem.

The power budget and the minimum rates are dualized with multipliers
``lam`` and ``mu``. For fixed multipliers the dual function separates per
subcarrier: every SDMA set gets a closed-form score and the set with the
smallest score is chosen. ``solve_dual`` maximizes the dual function with a
projected subgradient method and water-fills the SDMA choices it meets to
keep a feasible candidate; when the SDMA sets are fixed it instead solves the
remaining power allocation exactly by multi-level water-filling.
"""

import math
import time
from collections.abc import Sequence
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.optimize import brentq

from .exceptions import (
    InvalidInputError,
    RejectedSetError,
    SolverTimeoutError,
    UnboundedPowerError,
)
from .model import Allocation, build_allocation
from .monitoring import SolverLogger, get_logger
from .precompute import SdmaSet, SetPrecompute
from .types import ProblemInstance, SolverParams

LN2 = math.log(2.0)
EMPTY = -1

AssignmentLike = np.ndarray | Sequence[SdmaSet | Sequence[int] | int | None]


@dataclass(frozen=True)
class DualPoint:
    """Multipliers ``(lam, mu)``; ``mu`` has one entry per user, 0 for nRT users."""

    lam: float
    mu: tuple[float, ...]

    def __post_init__(self) -> None:
        if not math.isfinite(self.lam) or self.lam <= 0:
            raise UnboundedPowerError(f"lam must be positive and finite, got {self.lam}")
        if any(not math.isfinite(m) or m < 0 for m in self.mu):
            raise InvalidInputError(f"mu must be finite and non-negative, got {self.mu}")

    @classmethod
    def start(cls, lam: float, num_users: int) -> "DualPoint":
        return cls(lam=float(lam), mu=(0.0,) * num_users)

    def mu_array(self) -> np.ndarray:
        return np.asarray(self.mu, dtype=np.float64)


@dataclass(frozen=True)
class TraceRecord:
    """One dual evaluation of a solve, as written to the trace CSV."""

    iteration: int
    theta: float
    lam: float
    g_lambda: float
    g_mu_norm: float
    total_power: float
    mu: tuple[float, ...]
    rt_rates: dict[int, float] = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class DualEvaluation:
    """Dual function value, subgradient and argmin allocation at one point."""

    point: DualPoint
    theta: float
    set_indices: np.ndarray  # (N,), EMPTY where no set transmits
    powers: np.ndarray  # (K, N) signal power
    tx_power: np.ndarray  # (K, N) gamma^2 * power
    g_lambda: float
    g_mu: np.ndarray  # (K,), zero for nRT users
    precompute: SetPrecompute = field(repr=False)
    instance: ProblemInstance = field(repr=False)

    @property
    def rates(self) -> np.ndarray:
        return np.log2(1.0 + self.powers)

    @property
    def total_power(self) -> float:
        return float(self.tx_power.sum())

    @property
    def g_mu_norm(self) -> float:
        return float(np.linalg.norm(self.g_mu))

    @property
    def assignment(self) -> tuple[tuple[int, ...], ...]:
        return tuple(
            () if i == EMPTY else self.precompute.sets[i].members
            for i in self.set_indices
        )

    @cached_property
    def candidate(self) -> Allocation:
        """The argmin primal point as a full allocation (beams, rates, flags)."""
        pre = self.precompute
        carriers = np.arange(pre.num_subcarriers)
        safe = np.maximum(self.set_indices, 0)
        directions = np.zeros(pre.channels.h.shape, dtype=np.complex128)
        chosen = pre.directions[carriers, safe]  # (N, P, M)
        users = pre.members[safe]  # (N, P)
        mask = pre.member_mask[safe] & (self.set_indices >= 0)[:, np.newaxis]
        grid = np.broadcast_to(carriers[:, np.newaxis], users.shape)
        directions[users[mask], grid[mask]] = chosen[mask]
        return build_allocation(
            self.instance, pre.channels, self.assignment, self.powers, directions
        )

    def record(self, iteration: int) -> TraceRecord:
        return TraceRecord(
            iteration=iteration,
            theta=self.theta,
            lam=self.point.lam,
            g_lambda=self.g_lambda,
            g_mu_norm=self.g_mu_norm,
            total_power=self.total_power,
            mu=self.point.mu,
            rt_rates={
                k: float(self.rates[k].sum()) for k in self.instance.rt_users
            },
        )


@dataclass(frozen=True, eq=False)
class DualSolution:
    """Outcome of ``solve_dual``.

    ``best`` is the evaluation with the largest dual value seen, which gives
    the upper bound. ``final`` is the last evaluation; when ``converged`` by
    the stopping rule on the iterates its allocation is feasible. ``primal``
    is the exactly water-filled SDMA choice with the largest feasible
    objective met during the solve, if any.
    """

    best: DualEvaluation
    final: DualEvaluation
    iterations: int
    converged: bool
    upper_bound: float
    trace: tuple[TraceRecord, ...] = ()
    primal: DualEvaluation | None = None

    @property
    def best_point(self) -> DualPoint:
        return self.best.point

    @property
    def best_theta(self) -> float:
        return self.best.theta

    @cached_property
    def candidate(self) -> Allocation:
        """Best feasible allocation of the solve, else the argmin of the best iterate."""
        sources = [self.final] if self.converged else []
        if self.primal is not None:
            sources.append(self.primal)
        feasible = [ev.candidate for ev in sources if ev.candidate.is_feasible]
        if feasible:
            return max(feasible, key=lambda alloc: alloc.objective)
        return (self.final if self.converged else self.best).candidate


def user_power(c_prime: float, lam: float, gamma: float) -> float:
    """Optimal signal power of one stream for fixed multipliers.

    Maximizes ``c' log2(1 + p) - lam gamma^2 p`` over ``p >= 0``.
    """
    if not math.isfinite(lam) or lam <= 0:
        raise UnboundedPowerError(f"lam must be positive, got {lam}")
    if not math.isfinite(gamma) or gamma <= 0:
        raise InvalidInputError(f"gamma must be positive, got {gamma}")
    return max(0.0, c_prime / (lam * gamma**2 * LN2) - 1.0)


def _stream_powers(
    c_prime: np.ndarray, lam: float, gamma2: np.ndarray, mask: np.ndarray
) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        p = c_prime / (lam * gamma2 * LN2) - 1.0
    return np.where(mask & (gamma2 > 0), np.maximum(p, 0.0), 0.0)


def _stream_scores(
    c_prime: np.ndarray, lam: float, gamma2: np.ndarray, p: np.ndarray, mask: np.ndarray
) -> np.ndarray:
    value = c_prime * np.log2(1.0 + p) - lam * gamma2 * p
    return -np.sum(np.where(mask, value, 0.0), axis=-1)


def _effective_weights(point: DualPoint, instance: ProblemInstance) -> np.ndarray:
    if len(point.mu) != instance.num_users:
        raise InvalidInputError(
            f"mu has {len(point.mu)} entries, expected {instance.num_users}"
        )
    return np.asarray(instance.weights) + point.mu_array()


def _check_shapes(pre: SetPrecompute, instance: ProblemInstance) -> None:
    if (
        pre.num_users != instance.num_users
        or pre.num_subcarriers != instance.num_subcarriers
    ):
        raise InvalidInputError(
            f"precompute is for K={pre.num_users}, N={pre.num_subcarriers}; "
            f"instance has K={instance.num_users}, N={instance.num_subcarriers}"
        )


def set_score(
    n: int,
    s: SdmaSet | int,
    point: DualPoint,
    pre: SetPrecompute,
    instance: ProblemInstance,
) -> tuple[float, tuple[float, ...]]:
    """Score ``f_{n,s}`` of one set and the members' optimal powers.

    Raises:
        RejectedSetError: If the set is rank deficient on this subcarrier
    """
    i = pre.set_index(s.members) if isinstance(s, SdmaSet) else int(s)
    if not 0 <= n < pre.num_subcarriers or not 0 <= i < pre.num_sets:
        raise InvalidInputError(f"no set {i} on subcarrier {n}")
    if not pre.usable[n, i]:
        raise RejectedSetError(f"set {pre.sets[i]} is rank deficient on subcarrier {n}")
    c_prime = _effective_weights(point, instance)
    size = pre.sets[i].size
    users = pre.members[i, :size]
    gamma2 = pre.gamma[n, i, :size] ** 2
    mask = np.ones(size, dtype=bool)
    p = _stream_powers(c_prime[users], point.lam, gamma2, mask)
    score = _stream_scores(c_prime[users], point.lam, gamma2, p, mask)
    return float(score), tuple(float(x) for x in p)


def assignment_indices(pre: SetPrecompute, assignment: AssignmentLike) -> np.ndarray:
    """Per-subcarrier set indices (``EMPTY`` for no transmission)."""
    if isinstance(assignment, np.ndarray) and assignment.dtype.kind in "iu":
        idx = assignment.astype(np.int64)
    else:
        items = []
        for entry in assignment:
            if entry is None:
                items.append(EMPTY)
            elif isinstance(entry, SdmaSet):
                items.append(pre.set_index(entry.members))
            elif isinstance(entry, (int, np.integer)):
                items.append(int(entry))
            elif len(entry) == 0:
                items.append(EMPTY)
            else:
                items.append(pre.set_index(entry))
        idx = np.asarray(items, dtype=np.int64)
    if idx.shape != (pre.num_subcarriers,):
        raise InvalidInputError(
            f"assignment covers {idx.shape[0] if idx.ndim else 0} subcarriers, "
            f"expected {pre.num_subcarriers}"
        )
    if np.any((idx < EMPTY) | (idx >= pre.num_sets)):
        raise InvalidInputError("assignment references an unknown set index")
    for n, i in enumerate(idx):
        if i != EMPTY and not pre.usable[n, i]:
            raise RejectedSetError(
                f"set {pre.sets[i]} is rank deficient on subcarrier {n}"
            )
    return idx


def eval_dual(
    point: DualPoint,
    pre: SetPrecompute,
    instance: ProblemInstance,
    set_indices: np.ndarray | None = None,
) -> DualEvaluation:
    """Evaluate the dual function, a subgradient and the argmin allocation.

    With ``set_indices`` the choice of SDMA sets is fixed instead of
    minimized; this is the dual of the pure power allocation problem.
    Ties between sets resolve to the lexicographically smallest set.
    """
    _check_shapes(pre, instance)
    c_prime = _effective_weights(point, instance)
    lam = point.lam
    carriers = np.arange(pre.num_subcarriers)

    if set_indices is None:
        gamma2 = pre.gamma**2  # (N, S, P)
        mask = np.broadcast_to(pre.member_mask, gamma2.shape)
        cp = np.where(pre.member_mask, c_prime[np.maximum(pre.members, 0)], 0.0)
        cp = np.broadcast_to(cp, gamma2.shape)
        p = _stream_powers(cp, lam, gamma2, mask)
        scores = np.where(pre.usable, _stream_scores(cp, lam, gamma2, p, mask), np.inf)
        idx = np.argmin(scores, axis=1)
        idx[~pre.usable.any(axis=1)] = EMPTY
    else:
        idx = np.asarray(set_indices, dtype=np.int64)

    safe = np.maximum(idx, 0)
    valid = idx >= 0
    users = pre.members[safe]  # (N, P)
    mask = pre.member_mask[safe] & valid[:, np.newaxis]
    gamma2 = pre.gamma[carriers, safe] ** 2  # (N, P)
    cp = np.where(mask, c_prime[np.maximum(users, 0)], 0.0)
    p = _stream_powers(cp, lam, gamma2, mask)
    carrier_scores = _stream_scores(cp, lam, gamma2, p, mask)

    shape = (instance.num_users, instance.num_subcarriers)
    powers = np.zeros(shape)
    tx_power = np.zeros(shape)
    grid = np.broadcast_to(carriers[:, np.newaxis], users.shape)
    powers[users[mask], grid[mask]] = p[mask]
    tx_power[users[mask], grid[mask]] = (gamma2 * p)[mask]

    min_rates = np.asarray(instance.min_rates)
    theta = (
        -lam * instance.power_budget
        + float(point.mu_array() @ min_rates)
        + float(carrier_scores.sum())
    )
    user_rates = np.log2(1.0 + powers).sum(axis=1)
    g_mu = np.where(min_rates > 0, min_rates - user_rates, 0.0)

    return DualEvaluation(
        point=point,
        theta=float(theta),
        set_indices=idx,
        powers=powers,
        tx_power=tx_power,
        g_lambda=float(tx_power.sum() - instance.power_budget),
        g_mu=g_mu,
        precompute=pre,
        instance=instance,
    )


def initial_lambda(
    instance: ProblemInstance, pre: SetPrecompute, params: SolverParams
) -> float:
    """Power price at which the unconstrained choice (``mu = 0``) uses the budget."""
    usable_gamma = pre.gamma[pre.usable[:, :, np.newaxis] & pre.member_mask]
    usable_gamma = usable_gamma[usable_gamma > 0]
    if usable_gamma.size == 0:
        return params.lambda_min
    lam_hi = 2.0 * instance.max_weight / (float(np.min(usable_gamma)) ** 2 * LN2)
    lam_lo = min(params.lambda_min, lam_hi / 2.0)

    def excess(log_lam: float) -> float:
        point = DualPoint.start(math.exp(log_lam), instance.num_users)
        return eval_dual(point, pre, instance).g_lambda

    if excess(math.log(lam_lo)) <= 0:
        return lam_lo
    root = brentq(excess, math.log(lam_lo), math.log(lam_hi), xtol=1e-10, maxiter=200)
    return max(math.exp(root), params.lambda_min)


def _stopping_rule_met(
    ev: DualEvaluation, instance: ProblemInstance, params: SolverParams
) -> bool:
    rt = list(instance.rt_users)
    min_rates = np.asarray(instance.min_rates)[rt]
    g_mu = ev.g_mu[rt]
    mu = ev.point.mu_array()[rt]
    feasible = ev.g_lambda <= params.eps_feas * instance.power_budget and bool(
        np.all(g_mu <= params.eps_feas * min_rates)
    )
    slack = abs(ev.point.lam * ev.g_lambda) <= params.eps_comp and bool(
        np.all(np.abs(mu * g_mu) <= params.eps_comp)
    )
    return feasible and slack


def _next_point(
    ev: DualEvaluation,
    iteration: int,
    instance: ProblemInstance,
    params: SolverParams,
    mu_max: float,
    step_scale: float = 1.0,
) -> DualPoint:
    rt = list(instance.rt_users)
    min_rates = np.asarray(instance.min_rates)
    lam = ev.point.lam
    mu = ev.point.mu_array()

    if params.scaling == "relative":
        u_lam = ev.g_lambda / instance.power_budget
        u_mu = ev.g_mu[rt] / min_rates[rt]
        scale_lam, scale_mu = lam, instance.max_weight
        base = params.relative_step
    else:
        u_lam = ev.g_lambda
        u_mu = ev.g_mu[rt]
        scale_lam, scale_mu = 1.0, 1.0
        base = params.step

    if params.step_rule == "normalized":
        norm = math.sqrt(u_lam**2 + float(np.sum(u_mu**2)))
        alpha = base / norm if norm > 0 else 0.0
    elif params.step_rule == "diminishing":
        alpha = base / math.sqrt(iteration)
    else:
        alpha = base * step_scale

    new_lam = max(params.lambda_min, lam + alpha * scale_lam * u_lam)
    new_mu = np.zeros_like(mu)
    new_mu[rt] = np.clip(mu[rt] + alpha * scale_mu * u_mu, 0.0, mu_max)
    return DualPoint(lam=float(new_lam), mu=tuple(float(m) for m in new_mu))


@dataclass
class _PrimalTracker:
    """Exact power allocations of the SDMA choices met along the iterations.

    Every new per-carrier choice is water-filled exactly. The best feasible
    one is kept, together with the multipliers that price it, which are a
    dual point of their own.
    """

    instance: ProblemInstance
    pre: SetPrecompute
    params: SolverParams
    mu_max: float
    best: DualEvaluation | None = None
    objective: float = -math.inf
    seen: set[bytes] = field(default_factory=set)

    def visit(self, ev: DualEvaluation) -> DualPoint | None:
        """Water-fill a new choice; return its pricing multipliers when feasible."""
        key = ev.set_indices.tobytes()
        if key in self.seen:
            return None
        self.seen.add(key)
        fixed = _solve_fixed(self.instance, self.pre, ev.set_indices)
        if not fixed.converged:
            return None
        priced = fixed.final
        value = float(np.asarray(self.instance.weights) @ priced.rates.sum(axis=1))
        if value > self.objective:
            self.best, self.objective = priced, value
        mu = np.minimum(priced.point.mu_array(), self.mu_max)
        return DualPoint(
            lam=max(priced.point.lam, self.params.lambda_min),
            mu=tuple(float(m) for m in mu),
        )

    def certifies(self, upper_bound: float) -> bool:
        if self.best is None or not _stopping_rule_met(
            self.best, self.instance, self.params
        ):
            return False
        slack = upper_bound - self.objective
        return slack <= self.params.eps_gap * max(abs(upper_bound), 1e-12)


def solve_dual(
    instance: ProblemInstance,
    pre: SetPrecompute,
    params: SolverParams | None = None,
    *,
    assignment: AssignmentLike | None = None,
    initial: DualPoint | None = None,
    deadline: float | None = None,
    logger: SolverLogger | None = None,
) -> DualSolution:
    """Maximize the dual function.

    The iterates follow the projected subgradient. With ``primal_check``
    each new SDMA choice is also water-filled exactly: the best feasible
    result becomes the candidate, and the solve stops once it meets the
    stopping rule within ``eps_gap`` of the upper bound. When the
    multipliers pricing such an allocation give a larger dual value than
    any iterate so far, the next iterate starts from them.

    Args:
        instance: Problem data
        pre: Precomputed beam directions for the channel realization
        params: Step rule, tolerances and iteration limit
        assignment: Fix the SDMA sets per subcarrier and solve only the
            power allocation dual (exactly, by water-filling)
        initial: Warm start; defaults to ``mu = 0`` and the power price at
            which the unconstrained choice spends exactly the budget
        deadline: ``time.monotonic()`` value after which to give up

    Raises:
        SolverTimeoutError: If ``deadline`` passes during the iterations
    """
    _check_shapes(pre, instance)
    params = params or SolverParams()
    logger = logger or get_logger()
    started = time.perf_counter()

    if assignment is not None:
        solution = _solve_fixed(instance, pre, assignment_indices(pre, assignment))
        logger.log_solver_event(
            solver="water_filling",
            converged=solution.converged,
            iterations=solution.iterations,
            duration_ms=(time.perf_counter() - started) * 1000,
        )
        return solution

    mu_max = params.resolved_mu_max(instance)
    point = initial or DualPoint.start(
        initial_lambda(instance, pre, params), instance.num_users
    )
    debug = logger.is_debug_enabled()
    primal = _PrimalTracker(instance, pre, params, mu_max)

    trace: list[TraceRecord] = []
    best: DualEvaluation | None = None
    ev: DualEvaluation | None = None
    converged = False
    iteration = 0
    step_scale = 1.0
    halvings = stall = 0
    for iteration in range(1, params.max_iterations + 1):
        if deadline is not None and time.monotonic() > deadline:
            raise SolverTimeoutError(
                f"dual solve exceeded its deadline after {iteration - 1} iterations"
            )
        ev = eval_dual(point, pre, instance)
        trace.append(ev.record(iteration))
        if best is None or ev.theta > best.theta:
            best, stall = ev, 0
        else:
            stall += 1
        if debug and iteration % 100 == 1:
            logger.log_dual_iteration(
                iteration, ev.theta, point.lam, ev.g_lambda, ev.g_mu_norm
            )
        if _stopping_rule_met(ev, instance, params):
            converged = True
            break

        jump = primal.visit(ev) if params.primal_check else None
        if primal.certifies(-best.theta):
            converged = True
            break

        if params.step_rule == "adaptive" and stall >= params.patience:
            if halvings < params.max_halvings:
                step_scale /= 2.0
                halvings += 1
            stall = 0
        if jump is not None and eval_dual(jump, pre, instance).theta > best.theta:
            point = jump
        else:
            point = _next_point(ev, iteration, instance, params, mu_max, step_scale)

    assert best is not None and ev is not None
    logger.log_solver_event(
        solver="subgradient",
        converged=converged,
        iterations=iteration,
        duration_ms=(time.perf_counter() - started) * 1000,
        upper_bound=-best.theta,
    )
    return DualSolution(
        best=best,
        final=ev,
        iterations=iteration,
        converged=converged,
        upper_bound=-best.theta,
        trace=tuple(trace),
        primal=primal.best,
    )


def _min_water_level(gamma2: np.ndarray, target: float) -> float:
    """Smallest common level ``W`` with ``sum(max(0, log2(W / gamma2))) = target``."""
    a = np.sort(np.log2(gamma2))
    for m in range(1, a.size + 1):
        x = (target + float(a[:m].sum())) / m
        if m == a.size or x <= a[m]:
            return float(2.0**x)
    raise AssertionError("unreachable")


def _solve_fixed(
    instance: ProblemInstance, pre: SetPrecompute, idx: np.ndarray
) -> DualSolution:
    """Exact power allocation dual for fixed SDMA sets.

    Each user fills its streams up to a common level ``W_k``: the level
    priced by ``lam`` for nRT users, raised to the minimum level that
    reaches the rate target for RT users. ``lam`` is then set so the total
    power meets the budget. If even the minimum levels overspend the
    budget, the RT levels are scaled down uniformly to fit and the
    allocation is reported infeasible.
    """
    carriers = np.arange(pre.num_subcarriers)
    safe = np.maximum(idx, 0)
    mask = pre.member_mask[safe] & (idx >= 0)[:, np.newaxis]
    users = pre.members[safe][mask]
    gamma2 = (pre.gamma[carriers, safe] ** 2)[mask]
    weights = np.asarray(instance.weights)
    budget = instance.power_budget
    num_users = instance.num_users
    evaluations = 0

    w_min = np.zeros(num_users)
    missing = []
    for k in instance.rt_users:
        own = gamma2[users == k]
        if own.size == 0:
            missing.append(k)
        else:
            w_min[k] = _min_water_level(own, instance.min_rates[k])

    def power_at(lam: float) -> float:
        nonlocal evaluations
        evaluations += 1
        level = np.maximum(weights / (lam * LN2), w_min)
        return float(np.sum(np.maximum(0.0, level[users] - gamma2)))

    if users.size == 0:
        point = DualPoint.start(SolverParams().lambda_min, num_users)
        ev = eval_dual(point, pre, instance, idx)
        bound = math.inf if missing else -ev.theta
        return DualSolution(
            best=ev,
            final=ev,
            iterations=0,
            converged=not missing,
            upper_bound=bound,
            trace=(ev.record(0),),
        )

    lam_hi = float(np.max(weights[users] / (gamma2 * LN2)))
    power_floor = float(np.sum(np.maximum(0.0, w_min[users] - gamma2)))

    if power_floor <= budget:
        if power_floor >= budget * (1.0 - 1e-12):
            lam = lam_hi
        else:
            lam_lo = lam_hi
            for _ in range(400):
                lam_lo /= 16.0
                if power_at(lam_lo) > budget:
                    break
            root = brentq(
                lambda x: power_at(math.exp(x)) - budget,
                math.log(lam_lo),
                math.log(lam_hi),
                xtol=1e-13,
                maxiter=200,
            )
            lam = math.exp(root)
        mu = np.zeros(num_users)
        for k in instance.rt_users:
            if w_min[k] > 0:
                mu[k] = max(0.0, w_min[k] * lam * LN2 - weights[k])
        feasible = not missing
    else:
        rt_streams = w_min[users] > 0

        def rt_excess(rho: float) -> float:
            nonlocal evaluations
            evaluations += 1
            over = rho * w_min[users][rt_streams] - gamma2[rt_streams]
            return float(np.sum(np.maximum(0.0, over))) - budget

        rho = brentq(rt_excess, 0.0, 1.0, xtol=1e-14, maxiter=200)
        rt_with_streams = [k for k in instance.rt_users if w_min[k] > 0]
        lam = max(
            [lam_hi]
            + [weights[k] / (rho * w_min[k] * LN2) for k in rt_with_streams]
        )
        mu = np.zeros(num_users)
        for k in rt_with_streams:
            mu[k] = max(0.0, rho * w_min[k] * lam * LN2 - weights[k])
        feasible = False

    point = DualPoint(lam=float(lam), mu=tuple(float(m) for m in mu))
    ev = eval_dual(point, pre, instance, idx)
    return DualSolution(
        best=ev,
        final=ev,
        iterations=evaluations,
        converged=feasible,
        upper_bound=-ev.theta if feasible else math.inf,
        trace=(ev.record(evaluations),),
    )


def power_allocation_fixed(
    assignment: AssignmentLike,
    instance: ProblemInstance,
    pre: SetPrecompute,
    params: SolverParams | None = None,
) -> Allocation:
    """Optimal powers and beams for fixed SDMA sets.

    The returned allocation's ``feasible`` flags say whether the minimum
    rates could be met within the budget.
    """
    return solve_dual(instance, pre, params, assignment=assignment).candidate


def write_trace(trace: Sequence[TraceRecord], path: str | Path) -> Path:
    """Write a per-iteration solver trace as CSV."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(
        [
            {
                "iteration": r.iteration,
                "theta": r.theta,
                "lam": r.lam,
                "g_lambda": r.g_lambda,
                "g_mu_norm": r.g_mu_norm,
                "total_power": r.total_power,
                **{f"mu_{k}": m for k, m in enumerate(r.mu)},
                **{f"rate_{k}": v for k, v in r.rt_rates.items()},
            }
            for r in trace
        ]
    )
    frame.to_csv(path, index=False)
    return path
