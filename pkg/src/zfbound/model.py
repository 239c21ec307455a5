"""Channels, rates, allocations and feasibility: the vocabulary of every solver."""

import dataclasses
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from .exceptions import InvalidInputError
from .types import ProblemInstance, ScenarioConfig

DEFAULT_TOL_POWER = 1e-6
DEFAULT_TOL_RATE = 1e-6
DEFAULT_TOL_ZF = 1e-8


@dataclass(frozen=True, eq=False)
class ChannelTensor:
    """Channel row vectors ``h[k, n]`` of length ``M``, stored as a ``(K, N, M)`` array."""

    h: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.h, dtype=np.complex128, copy=True)
        if arr.ndim != 3 or min(arr.shape) < 1:
            raise InvalidInputError(f"channel tensor must be (K, N, M), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidInputError("channel tensor contains non-finite entries")
        arr.flags.writeable = False
        object.__setattr__(self, "h", arr)

    @property
    def num_users(self) -> int:
        return self.h.shape[0]

    @property
    def num_subcarriers(self) -> int:
        return self.h.shape[1]

    @property
    def num_antennas(self) -> int:
        return self.h.shape[2]

    def vector(self, k: int, n: int) -> np.ndarray:
        return self.h[k, n]

    def check_against(self, instance: ProblemInstance) -> None:
        expected = (instance.num_users, instance.num_subcarriers, instance.num_antennas)
        if self.h.shape != expected:
            raise InvalidInputError(
                f"channel tensor shape {self.h.shape} does not match instance {expected}"
            )


def generate_channels(config: ScenarioConfig, realization_index: int) -> ChannelTensor:
    """Draw i.i.d. CN(0, 1) channels with per-user large-scale attenuation.

    Every (realization, user, subcarrier) triple has its own seeded stream,
    so a realization replays bit-identically regardless of sweep order or of
    how realizations are distributed across workers.
    """
    if realization_index < 0:
        raise InvalidInputError(f"realization_index must be >= 0, got {realization_index}")
    inst = config.instance
    num_users, num_carriers, num_antennas = (
        inst.num_users,
        inst.num_subcarriers,
        inst.num_antennas,
    )
    amplitude = 10.0 ** (-np.asarray(inst.user_attenuations_db()) / 20.0)

    h = np.empty((num_users, num_carriers, num_antennas), dtype=np.complex128)
    scale = math.sqrt(0.5)
    for k in range(num_users):
        for n in range(num_carriers):
            seq = np.random.SeedSequence(
                entropy=config.seed, spawn_key=(realization_index, k, n)
            )
            rng = np.random.default_rng(seq)
            draws = rng.standard_normal((2, num_antennas))
            h[k, n] = scale * (draws[0] + 1j * draws[1])
        h[k] *= amplitude[k]
    return ChannelTensor(h)


def zf_rate(h: npt.ArrayLike, w: npt.ArrayLike) -> float:
    """Rate ``log2(1 + |h w|^2)`` in bps/Hz of a zero-forcing stream."""
    hv = np.asarray(h, dtype=np.complex128).reshape(-1)
    wv = np.asarray(w, dtype=np.complex128).reshape(-1)
    if hv.shape != wv.shape:
        raise InvalidInputError(f"length mismatch: h has {hv.size}, w has {wv.size}")
    return float(np.log2(1.0 + abs(np.dot(hv, wv)) ** 2))


@dataclass(frozen=True)
class FeasibilityFlags:
    power_ok: bool
    rates_ok: bool
    zf_ok: bool

    @property
    def ok(self) -> bool:
        return self.power_ok and self.rates_ok and self.zf_ok


@dataclass(frozen=True, eq=False)
class Allocation:
    """A complete primal point: SDMA sets, beams, powers and rates.

    ``powers[k, n]`` is the received signal power ``|h_{k,n} w_{k,n}|^2``
    (the power variable of the closed-form allocation); the transmit power
    of the stream is ``||w_{k,n}||^2``.
    """

    assignment: tuple[tuple[int, ...], ...]
    powers: np.ndarray  # (K, N)
    beams: np.ndarray  # (K, N, M)
    rates: np.ndarray  # (K, N), bps/Hz
    total_power: float
    objective: float
    feasible: FeasibilityFlags

    @property
    def per_user_rate(self) -> np.ndarray:
        return self.rates.sum(axis=1)

    @property
    def is_feasible(self) -> bool:
        return self.feasible.ok

    def rescored(self, instance: ProblemInstance) -> "Allocation":
        """Same allocation, objective recomputed with ``instance.weights``."""
        weights = np.asarray(instance.weights)
        return dataclasses.replace(
            self, objective=float(weights @ self.per_user_rate)
        )


def build_allocation(
    instance: ProblemInstance,
    channels: ChannelTensor,
    assignment: Sequence[Sequence[int]],
    powers: np.ndarray,
    directions: np.ndarray,
) -> Allocation:
    """Assemble an allocation from signal powers and unit-gain beam directions.

    Users with zero power are pruned from their carrier's SDMA set.
    """
    channels.check_against(instance)
    shape = (instance.num_users, instance.num_subcarriers)
    p = np.asarray(powers, dtype=np.float64)
    d = np.asarray(directions, dtype=np.complex128)
    if p.shape != shape or d.shape != channels.h.shape:
        raise InvalidInputError(
            f"powers {p.shape} / directions {d.shape} do not match instance {shape}"
        )
    if len(assignment) != instance.num_subcarriers:
        raise InvalidInputError(
            f"assignment has {len(assignment)} carriers, expected {instance.num_subcarriers}"
        )

    p = np.where(p > 0, p, 0.0)
    pruned = tuple(
        tuple(sorted(k for k in members if p[k, n] > 0))
        for n, members in enumerate(assignment)
    )
    mask = np.zeros(shape, dtype=bool)
    for n, members in enumerate(pruned):
        mask[list(members), n] = True
    p = np.where(mask, p, 0.0)

    beams = np.sqrt(p)[..., np.newaxis] * d
    beams[~mask] = 0.0
    gains = np.abs(np.einsum("knm,knm->kn", channels.h, beams)) ** 2
    rates = np.where(mask, np.log2(1.0 + gains), 0.0)
    total_power = float(np.sum(np.abs(beams) ** 2))
    objective = float(np.asarray(instance.weights) @ rates.sum(axis=1))

    alloc = Allocation(
        assignment=pruned,
        powers=p,
        beams=beams,
        rates=rates,
        total_power=total_power,
        objective=objective,
        feasible=FeasibilityFlags(True, True, True),
    )
    return dataclasses.replace(
        alloc, feasible=check_feasibility(alloc, instance, channels)
    )


def check_feasibility(
    alloc: Allocation,
    instance: ProblemInstance,
    channels: ChannelTensor,
    tol_power: float = DEFAULT_TOL_POWER,
    tol_rate: float = DEFAULT_TOL_RATE,
    tol_zf: float = DEFAULT_TOL_ZF,
) -> FeasibilityFlags:
    """Check the power budget, the minimum rates and zero-forcing."""
    channels.check_against(instance)
    power_ok = alloc.total_power <= instance.power_budget * (1.0 + tol_power)

    user_rates = alloc.per_user_rate
    rates_ok = all(
        user_rates[k] >= instance.min_rates[k] * (1.0 - tol_rate)
        for k in instance.rt_users
    )

    zf_ok = True
    beam_norms = np.linalg.norm(alloc.beams, axis=2)
    chan_norms = np.linalg.norm(channels.h, axis=2)
    for n, members in enumerate(alloc.assignment):
        if len(members) > instance.num_antennas:
            zf_ok = False
            break
        outside = np.ones(instance.num_users, dtype=bool)
        outside[list(members)] = False
        if np.any(beam_norms[outside, n] > 0):
            zf_ok = False
            break
        for k in members:
            for j in members:
                if j == k:
                    continue
                leak = abs(np.dot(channels.h[j, n], alloc.beams[k, n]))
                if leak > tol_zf * chan_norms[j, n] * beam_norms[k, n]:
                    zf_ok = False
        if not zf_ok:
            break

    return FeasibilityFlags(power_ok=bool(power_ok), rates_ok=rates_ok, zf_ok=zf_ok)


def penalty_objective(
    alloc: Allocation, instance: ProblemInstance, epsilon: float
) -> float:
    """Weighted sum rate with a linear penalty on unmet minimum rates."""
    user_rates = alloc.per_user_rate
    shortfall = sum(
        user_rates[k] - instance.min_rates[k]
        for k in instance.rt_users
        if user_rates[k] < instance.min_rates[k]
    )
    return float(np.asarray(instance.weights) @ user_rates + epsilon * shortfall)
