"""Tests for the dual function, the subgradient solver and fixed-set power allocation."""

import math
import time

import numpy as np
import pandas as pd
import pytest

from zfbound.dual import (
    EMPTY,
    DualPoint,
    _next_point,
    assignment_indices,
    eval_dual,
    power_allocation_fixed,
    set_score,
    solve_dual,
    user_power,
    write_trace,
)
from zfbound.exceptions import (
    InvalidInputError,
    RejectedSetError,
    SolverTimeoutError,
    UnboundedPowerError,
)
from zfbound.model import ChannelTensor
from zfbound.oracle import exact_enumeration
from zfbound.types import SolverParams

from .conftest import build_problem, random_channels

LN2 = math.log(2.0)


def _scalar_problem(weight: float = 1.0, power_budget: float = 10.0):
    """K = N = M = 1 with h = 1, so gamma = 1."""
    channels = ChannelTensor(np.ones((1, 1, 1), dtype=complex))
    return build_problem(channels, power_budget=power_budget, weights=[weight])


class TestUserPower:
    def test_known_value(self):
        assert user_power(2.0, 1.0, 1.0) == pytest.approx(2.0 / LN2 - 1.0, abs=1e-9)
        assert user_power(2.0, 1.0, 1.0) == pytest.approx(1.885390, abs=1e-6)

    def test_threshold_gives_zero(self):
        lam, gamma = 0.7, 1.3
        assert user_power(lam * gamma**2 * LN2, lam, gamma) == pytest.approx(0.0, abs=1e-12)

    def test_expensive_power_gives_zero(self):
        assert user_power(1.0, 1e9, 1.0) == 0.0

    def test_zero_price_is_unbounded(self):
        with pytest.raises(UnboundedPowerError):
            user_power(1.0, 0.0, 1.0)

    def test_beats_grid_scan(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            c = rng.uniform(0.1, 5.0)
            lam = rng.uniform(0.01, 10.0)
            gamma = rng.uniform(0.1, 3.0)
            p_star = user_power(c, lam, gamma)
            grid = np.linspace(0.0, 10 * p_star + 1.0, 10_000)
            value = c * np.log2(1 + grid) - lam * gamma**2 * grid
            best = c * math.log2(1 + p_star) - lam * gamma**2 * p_star
            assert best >= value.max() - 1e-9


class TestSetScore:
    def test_singleton_value(self):
        inst, pre = _scalar_problem(weight=2.0)
        point = DualPoint.start(1.0, 1)
        score, powers = set_score(0, pre.sets[0], point, pre, inst)
        p = 2.0 / LN2 - 1.0
        assert powers[0] == pytest.approx(p)
        assert score == pytest.approx(-(2.0 * math.log2(1 + p) - p))
        assert score == pytest.approx(-1.172142, abs=1e-6)

    def test_scores_never_positive(self, make_problem):
        inst, pre = make_problem(3, 2, 2, seed=4)
        point = DualPoint(lam=0.05, mu=(0.3, 0.0, 0.0))
        for n in range(pre.num_subcarriers):
            for i in range(pre.num_sets):
                score, _ = set_score(n, i, point, pre, inst)
                assert score <= 0.0

    def test_below_threshold_scores_zero(self, make_problem):
        inst, pre = make_problem(2, 1, 2)
        score, powers = set_score(0, 0, DualPoint.start(1e9, 2), pre, inst)
        assert score == 0.0
        assert powers == (0.0,)

    def test_rejected_set(self):
        h = np.zeros((2, 1, 2), dtype=complex)
        h[0, 0] = [1.0, 1.0]
        h[1, 0] = [1.0, 1.0]
        inst, pre = build_problem(ChannelTensor(h), rank_tol=1e-10)
        with pytest.raises(RejectedSetError):
            set_score(0, pre.set_index([0, 1]), DualPoint.start(1.0, 2), pre, inst)


class TestEvalDual:
    def test_expensive_power_zero_allocation(self, make_problem):
        inst, pre = make_problem(3, 2, 2, min_rates={0: 1.5})
        point = DualPoint(lam=1e9, mu=(0.4, 0.0, 0.0))
        ev = eval_dual(point, pre, inst)
        assert ev.theta == pytest.approx(-1e9 * inst.power_budget + 0.4 * 1.5)
        assert ev.g_lambda == pytest.approx(-inst.power_budget)
        assert ev.g_mu[0] == pytest.approx(1.5)

    def test_matches_set_by_set_minimum(self, make_problem):
        inst, pre = make_problem(3, 2, 2, seed=8, min_rates={1: 2.0})
        point = DualPoint(lam=0.02, mu=(0.0, 0.5, 0.0))
        ev = eval_dual(point, pre, inst)
        total = -point.lam * inst.power_budget + 0.5 * 2.0
        for n in range(pre.num_subcarriers):
            total += min(set_score(n, i, point, pre, inst)[0] for i in range(pre.num_sets))
        assert ev.theta == pytest.approx(total, rel=1e-12, abs=1e-9)

    @pytest.mark.parametrize("lam", [0.05, 0.2, 1.0])
    def test_scalar_against_brute_force(self, lam):
        inst, pre = _scalar_problem()
        ev = eval_dual(DualPoint.start(lam, 1), pre, inst)
        p = np.linspace(0.0, 100.0, 100_001)
        lagrangian = -(np.log2(1 + p) - lam * p)
        expected = -lam * inst.power_budget + min(0.0, lagrangian.min())
        assert ev.theta == pytest.approx(expected, abs=1e-5)

    def test_concavity(self, make_problem):
        inst, pre = make_problem(3, 2, 2, seed=2, min_rates={0: 3.0})
        rng = np.random.default_rng(0)

        def theta(lam, mu):
            return eval_dual(DualPoint(lam=lam, mu=(mu, 0.0, 0.0)), pre, inst).theta

        for _ in range(1000):
            x = (rng.uniform(0.005, 1.0), rng.uniform(0.0, 2.0))
            y = (rng.uniform(0.005, 1.0), rng.uniform(0.0, 2.0))
            mid = theta((x[0] + y[0]) / 2, (x[1] + y[1]) / 2)
            chord = (theta(*x) + theta(*y)) / 2
            assert mid >= chord - 1e-9 * (1 + abs(chord))

    @pytest.mark.parametrize("t", [0.25, 3.0, 40.0])
    def test_argmin_is_homogeneous(self, make_problem, t):
        inst, pre = make_problem(
            4, 3, 2, seed=9, min_rates={1: 2.0}, weights=[1.0, 2.0, 0.5, 1.5]
        )
        point = DualPoint(lam=0.04, mu=(0.0, 0.7, 0.0, 0.0))
        weights = tuple(t * c for c in inst.weights)
        scaled_inst = inst.model_copy(update={"weights": weights})
        scaled_point = DualPoint(lam=t * point.lam, mu=tuple(t * m for m in point.mu))
        ev = eval_dual(point, pre, inst)
        scaled = eval_dual(scaled_point, pre, scaled_inst)
        np.testing.assert_array_equal(scaled.set_indices, ev.set_indices)
        np.testing.assert_allclose(scaled.powers, ev.powers, rtol=1e-9, atol=1e-12)
        assert scaled.theta == pytest.approx(t * ev.theta, rel=1e-9)

    def test_ties_pick_lexicographically_smallest(self):
        h = np.ones((2, 1, 1), dtype=complex)
        inst, pre = build_problem(ChannelTensor(h))
        ev = eval_dual(DualPoint.start(0.01, 2), pre, inst)
        assert ev.assignment == ((0,),)

    def test_candidate_consistency(self, make_problem):
        inst, pre = make_problem(4, 3, 2, seed=6, min_rates={2: 3.0})
        ev = eval_dual(DualPoint(lam=0.03, mu=(0.0, 0.0, 0.8, 0.0)), pre, inst)
        alloc = ev.candidate
        assert alloc.feasible.zf_ok
        assert all(len(s) <= inst.num_antennas for s in alloc.assignment)
        assert ev.g_lambda == pytest.approx(alloc.total_power - inst.power_budget, abs=1e-8)
        assert ev.g_mu[2] == pytest.approx(3.0 - alloc.per_user_rate[2], abs=1e-8)
        assert np.allclose(ev.rates, alloc.rates, atol=1e-8)
        assert ev.g_mu[0] == 0.0

    def test_rejects_wrong_mu_length(self, make_problem):
        inst, pre = make_problem(3, 1, 2)
        with pytest.raises(InvalidInputError):
            eval_dual(DualPoint(lam=1.0, mu=(0.0,)), pre, inst)


class TestDualPoint:
    def test_rejects_zero_price(self):
        with pytest.raises(UnboundedPowerError):
            DualPoint(lam=0.0, mu=(0.0,))

    def test_rejects_negative_mu(self):
        with pytest.raises(InvalidInputError):
            DualPoint(lam=1.0, mu=(-0.1,))


class TestSolveDual:
    def test_single_user_spends_budget(self, single_user_problem):
        inst, pre = single_user_problem
        sol = solve_dual(inst, pre)
        assert sol.converged
        assert sol.best_point.mu == (0.0,)
        power = sol.candidate.total_power
        assert inst.power_budget * (1 - 1e-3) <= power <= inst.power_budget * (1 + 1e-3)
        assert sol.upper_bound == pytest.approx(sol.candidate.objective, rel=1e-6)

    def test_slack_rate_keeps_mu_zero(self, single_user_problem):
        inst, pre = single_user_problem
        unconstrained = solve_dual(inst, pre).candidate.per_user_rate[0]
        rt = inst.model_copy(update={"min_rates": (0.5 * unconstrained,)})
        sol = solve_dual(rt, pre)
        assert sol.converged
        assert sol.best_point.mu == (0.0,)
        assert sol.candidate.is_feasible

    def test_infeasible_rate_drives_mu_to_cap(self, single_user_problem):
        inst, pre = single_user_problem
        unconstrained = solve_dual(inst, pre).candidate.per_user_rate[0]
        rt = inst.model_copy(update={"min_rates": (2.0 * unconstrained,)})
        params = SolverParams(max_iterations=200, mu_max=5.0)
        sol = solve_dual(rt, pre, params)
        assert not sol.converged
        assert sol.iterations == 200
        assert sol.final.point.mu[0] == pytest.approx(5.0)
        assert sol.trace[-1].theta > sol.trace[0].theta

    def test_upper_bound_dominates_oracle(self, make_problem):
        for seed in range(3):
            inst, pre = make_problem(3, 2, 2, seed=seed, min_rates={0: 2.0})
            sol = solve_dual(inst, pre, SolverParams(max_iterations=300))
            exact = exact_enumeration(inst, pre)
            assert math.isfinite(sol.upper_bound)
            if exact.found:
                assert exact.allocation.objective <= sol.upper_bound * (1 + 1e-9)

    def test_best_iterate_is_reported(self, small_rt_problem):
        inst, pre = small_rt_problem
        sol = solve_dual(inst, pre, SolverParams(max_iterations=100))
        assert sol.best_theta == max(r.theta for r in sol.trace)
        assert sol.upper_bound == -sol.best_theta
        assert len(sol.trace) == sol.iterations

    @pytest.mark.parametrize(
        "params",
        [
            SolverParams(scaling="none", step=0.001, max_iterations=100),
            SolverParams(step_rule="normalized", relative_step=0.05, max_iterations=100),
            SolverParams(step_rule="diminishing", max_iterations=100),
        ],
    )
    def test_step_rules_give_valid_bounds(self, small_rt_problem, params):
        inst, pre = small_rt_problem
        sol = solve_dual(inst, pre, params)
        fixed = power_allocation_fixed(sol.best.set_indices, inst, pre)
        assert sol.iterations <= 100
        assert fixed.objective <= sol.upper_bound * (1 + 1e-9) or not fixed.is_feasible

    def test_primal_check_off_keeps_no_primal(self, small_rt_problem):
        inst, pre = small_rt_problem
        sol = solve_dual(inst, pre, SolverParams(max_iterations=30, primal_check=False))
        assert sol.primal is None

    @pytest.mark.parametrize("seed", range(4))
    def test_primal_is_best_water_filled_choice(self, make_problem, seed):
        inst, pre = make_problem(4, 6, 2, seed=seed, min_rates={0: 3.0})
        sol = solve_dual(inst, pre, SolverParams(max_iterations=300))
        if sol.primal is None:
            return
        alloc = sol.primal.candidate
        assert alloc.is_feasible
        assert alloc.objective <= sol.upper_bound * (1 + 1e-9)
        fixed = power_allocation_fixed(sol.primal.set_indices, inst, pre)
        assert fixed.objective == pytest.approx(alloc.objective, rel=1e-9)
        assert sol.candidate.is_feasible
        assert sol.candidate.objective >= alloc.objective - 1e-9

    def test_converged_candidate_is_within_gap(self, make_problem):
        params = SolverParams()
        converged = 0
        for seed in range(5):
            inst, pre = make_problem(4, 16, 2, seed=seed, min_rates={0: 4.0})
            sol = solve_dual(inst, pre, params)
            if not sol.converged:
                continue
            converged += 1
            slack = sol.upper_bound - sol.candidate.objective
            assert slack <= params.eps_gap * sol.upper_bound + 1e-2
            assert slack >= -1e-2
        assert converged >= 1

    def test_jumps_keep_trace_consistent(self, make_problem):
        inst, pre = make_problem(4, 8, 2, seed=3, min_rates={1: 4.0})
        sol = solve_dual(inst, pre, SolverParams(max_iterations=200, eps_gap=0.0))
        assert len(sol.trace) == sol.iterations
        assert [r.iteration for r in sol.trace] == list(range(1, sol.iterations + 1))
        assert sol.best_theta == max(r.theta for r in sol.trace)
        assert sol.final.theta == sol.trace[-1].theta

    def test_step_scale_shrinks_the_move(self, small_rt_problem):
        inst, pre = small_rt_problem
        params = SolverParams(step_rule="adaptive")
        ev = eval_dual(DualPoint(lam=1e-4, mu=(50.0, 0.0, 0.0)), pre, inst)
        assert ev.g_lambda > 0
        full = _next_point(ev, 1, inst, params, 1e6)
        half = _next_point(ev, 1, inst, params, 1e6, step_scale=0.5)
        assert half.lam - ev.point.lam == pytest.approx(0.5 * (full.lam - ev.point.lam))
        assert half.mu[0] - 50.0 == pytest.approx(0.5 * (full.mu[0] - 50.0))

    def test_adaptive_step_gives_valid_bound(self, small_rt_problem):
        inst, pre = small_rt_problem
        params = SolverParams(patience=1, max_halvings=3, max_iterations=100)
        sol = solve_dual(inst, pre, params)
        exact = exact_enumeration(inst, pre)
        assert exact.allocation.objective <= sol.upper_bound * (1 + 1e-9)

    def test_warm_start(self, single_user_problem):
        inst, pre = single_user_problem
        cold = solve_dual(inst, pre)
        warm = solve_dual(inst, pre, initial=cold.best_point)
        assert warm.iterations == 1
        assert warm.upper_bound == pytest.approx(cold.upper_bound)

    def test_deadline(self, small_rt_problem):
        inst, pre = small_rt_problem
        with pytest.raises(SolverTimeoutError):
            solve_dual(inst, pre, deadline=time.monotonic() - 1.0)

    def test_write_trace(self, small_rt_problem, tmp_path):
        inst, pre = small_rt_problem
        sol = solve_dual(inst, pre, SolverParams(max_iterations=20))
        path = write_trace(sol.trace, tmp_path / "trace.csv")
        frame = pd.read_csv(path)
        assert len(frame) == sol.iterations
        assert {"iteration", "theta", "lam", "g_lambda", "g_mu_norm", "mu_0", "rate_0"} <= set(
            frame.columns
        )


class TestPowerAllocationFixed:
    def test_all_empty(self, make_problem):
        inst, pre = make_problem(2, 3, 2)
        alloc = power_allocation_fixed([None, (), None], inst, pre)
        assert alloc.objective == 0.0
        assert alloc.total_power == 0.0

    def test_single_stream_takes_whole_budget(self):
        channels = random_channels(2, 1, 2, seed=3)
        inst, pre = build_problem(channels, power_budget=10.0)
        alloc = power_allocation_fixed([(0,)], inst, pre)
        gain = np.linalg.norm(channels.h[0, 0]) ** 2
        assert alloc.rates[0, 0] == pytest.approx(math.log2(1 + gain * 10.0), rel=1e-9)
        assert alloc.total_power == pytest.approx(10.0, rel=1e-9)

    def test_unconstrained_water_filling(self, make_problem):
        inst, pre = make_problem(3, 4, 2, seed=12)
        alloc = power_allocation_fixed([(0, 1), (2,), (0, 2), (1,)], inst, pre)
        assert alloc.total_power == pytest.approx(inst.power_budget, rel=1e-9)
        assert alloc.is_feasible
        # equal weights: every active stream shares one water level p + gamma^2
        levels = []
        tx = np.sum(np.abs(alloc.beams) ** 2, axis=2)
        for n, members in enumerate(alloc.assignment):
            for k in members:
                gamma2 = tx[k, n] / alloc.powers[k, n]
                levels.append(gamma2 * (1 + alloc.powers[k, n]))
        assert np.allclose(levels, levels[0], rtol=1e-8)

    def _split_problem(self, target):
        channels = random_channels(2, 3, 1, seed=21)
        return build_problem(channels, power_budget=20.0, min_rates={0: target})

    def test_binding_rate_is_met_exactly(self):
        inst, pre = self._split_problem(1.0)
        relaxed = inst.relaxed()
        assignment = [(0,), (0,), (1,)]
        free_rate = power_allocation_fixed(assignment, relaxed, pre).per_user_rate[0]
        max_rate = power_allocation_fixed([(0,), (0,), None], relaxed, pre).per_user_rate[0]
        target = 0.5 * (free_rate + max_rate)
        inst = inst.model_copy(update={"min_rates": (target, 0.0)})
        alloc = power_allocation_fixed(assignment, inst, pre)
        assert alloc.is_feasible
        assert alloc.per_user_rate[0] == pytest.approx(target, abs=1e-6)
        assert alloc.per_user_rate[1] > 0
        assert alloc.total_power == pytest.approx(inst.power_budget, rel=1e-9)

    def test_unreachable_rate_is_infeasible(self):
        inst, pre = self._split_problem(1.0)
        max_rate = power_allocation_fixed([(0,), (0,), None], inst.relaxed(), pre).per_user_rate[0]
        inst = inst.model_copy(update={"min_rates": (max_rate + 5.0, 0.0)})
        sol = solve_dual(inst, pre, assignment=[(0,), (0,), (1,)])
        alloc = sol.candidate
        assert not sol.converged
        assert sol.upper_bound == math.inf
        assert not alloc.feasible.rates_ok
        assert alloc.feasible.power_ok
        assert alloc.per_user_rate[1] == 0.0

    def test_rt_user_without_streams(self):
        inst, pre = self._split_problem(1.0)
        alloc = power_allocation_fixed([(1,), (1,), (1,)], inst, pre)
        assert not alloc.is_feasible
        assert alloc.total_power == pytest.approx(inst.power_budget, rel=1e-9)

    def test_rejected_set_in_assignment(self):
        h = np.zeros((2, 1, 2), dtype=complex)
        h[0, 0] = [1.0, 1.0]
        h[1, 0] = [1.0, 1.0]
        inst, pre = build_problem(ChannelTensor(h), rank_tol=1e-10)
        with pytest.raises(RejectedSetError):
            power_allocation_fixed([(0, 1)], inst, pre)

    def test_assignment_indices(self, make_problem):
        _, pre = make_problem(3, 3, 2)
        idx = assignment_indices(pre, [None, pre.sets[4], (0, 2)])
        assert idx[0] == EMPTY
        assert idx[1] == 4
        assert pre.sets[idx[2]].members == (0, 2)
        with pytest.raises(InvalidInputError):
            assignment_indices(pre, [None, None])
