"""Shared fixtures: small seeded systems that solve in milliseconds."""

from collections.abc import Callable

import numpy as np
import pytest

from zfbound.model import ChannelTensor
from zfbound.precompute import SetPrecompute, enumerate_sdma_sets, precompute_all
from zfbound.types import ProblemInstance

Problem = tuple[ProblemInstance, SetPrecompute]


def random_channels(
    num_users: int, num_subcarriers: int, num_antennas: int, seed: int = 0
) -> ChannelTensor:
    rng = np.random.default_rng(seed)
    shape = (num_users, num_subcarriers, num_antennas)
    h = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    return ChannelTensor(h)


def build_problem(
    channels: ChannelTensor,
    power_budget: float = 100.0,
    min_rates: dict[int, float] | None = None,
    weights: list[float] | None = None,
    rank_tol: float = 0.0,
) -> Problem:
    num_users, num_subcarriers, num_antennas = channels.h.shape
    instance = ProblemInstance.build(
        num_users=num_users,
        num_subcarriers=num_subcarriers,
        num_antennas=num_antennas,
        power_budget=power_budget,
        min_rates=min_rates,
        weights=weights,
    )
    sets = enumerate_sdma_sets(num_users, num_antennas)
    return instance, precompute_all(channels, sets, rank_tol)


@pytest.fixture
def make_problem() -> Callable[..., Problem]:
    """Factory: ``make_problem(K, N, M, seed=..., power_budget=..., min_rates=...)``."""

    def factory(
        num_users: int,
        num_subcarriers: int,
        num_antennas: int,
        seed: int = 0,
        **kwargs,
    ) -> Problem:
        channels = random_channels(num_users, num_subcarriers, num_antennas, seed)
        return build_problem(channels, **kwargs)

    return factory


@pytest.fixture
def single_user_problem() -> Problem:
    """One user, four subcarriers, two antennas: no set switching."""
    return build_problem(random_channels(1, 4, 2, seed=11), power_budget=100.0)


@pytest.fixture
def small_rt_problem() -> Problem:
    """Three users on two subcarriers with two antennas; user 0 needs 2 bps/Hz."""
    return build_problem(
        random_channels(3, 2, 2, seed=5), power_budget=100.0, min_rates={0: 2.0}
    )


SMALL_SCENARIO_TOML = """
seed = 3
realizations = 2
timeout_s = 60

[instance]
num_users = 3
num_subcarriers = 2
num_antennas = 2
power_budget_dbm = 20
num_rt_users = 1
min_rate = 1.0

[sweep]
parameter = "min_rate"
values = [1.0, 2.0]

[solver]
max_iterations = 200

[weights]
max_iterations = 5

[oracle]
enabled = true
"""


@pytest.fixture
def small_scenario_file(tmp_path):
    path = tmp_path / "small.toml"
    path.write_text(SMALL_SCENARIO_TOML, encoding="utf-8")
    return path
