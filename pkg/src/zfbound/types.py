"""Type definitions and configuration models for zfbound."""

import math
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

StepRule = Literal["fixed", "normalized", "diminishing", "adaptive"]
StepScaling = Literal["relative", "none"]
SweepParameter = Literal[
    "none", "min_rate", "rt_attenuation_db", "num_rt_users", "power_budget_dbm"
]


def dbm_to_linear(power_dbm: float, noise_dbm: float = 0.0) -> float:
    """Convert a dBm budget to linear units relative to a unit-variance noise."""
    return 10.0 ** ((power_dbm - noise_dbm) / 10.0)


class ProblemInstance(BaseModel):
    """Static problem data shared by every solver.

    Users are indexed ``0..K-1``. A user is real-time (RT) exactly when its
    minimum rate is positive.
    """

    model_config = ConfigDict(frozen=True)

    num_users: int = Field(ge=1)
    num_subcarriers: int = Field(ge=1)
    num_antennas: int = Field(ge=1)
    power_budget: float = Field(gt=0)  # linear, noise variance normalized to 1
    min_rates: tuple[float, ...]  # bps/Hz, 0 for nRT users
    weights: tuple[float, ...]

    @model_validator(mode="after")
    def _check_per_user_lengths(self) -> "ProblemInstance":
        if len(self.min_rates) != self.num_users:
            raise ValueError(
                f"min_rates has {len(self.min_rates)} entries, expected {self.num_users}"
            )
        if len(self.weights) != self.num_users:
            raise ValueError(
                f"weights has {len(self.weights)} entries, expected {self.num_users}"
            )
        if not math.isfinite(self.power_budget):
            raise ValueError("power_budget must be finite")
        if any(not math.isfinite(d) or d < 0 for d in self.min_rates):
            raise ValueError("min_rates must be finite and non-negative")
        if any(not math.isfinite(c) or c <= 0 for c in self.weights):
            raise ValueError("weights must be finite and positive")
        return self

    @classmethod
    def build(
        cls,
        num_users: int,
        num_subcarriers: int,
        num_antennas: int,
        power_budget: float,
        min_rates: dict[int, float] | list[float] | None = None,
        weights: list[float] | None = None,
    ) -> "ProblemInstance":
        """Build an instance, expanding a ``{user: rate}`` mapping to a full list."""
        if isinstance(min_rates, dict):
            rates = [0.0] * num_users
            for k, d in min_rates.items():
                rates[k] = float(d)
        elif min_rates is None:
            rates = [0.0] * num_users
        else:
            rates = [float(d) for d in min_rates]
        return cls(
            num_users=num_users,
            num_subcarriers=num_subcarriers,
            num_antennas=num_antennas,
            power_budget=power_budget,
            min_rates=tuple(rates),
            weights=tuple(weights) if weights is not None else (1.0,) * num_users,
        )

    @property
    def rt_users(self) -> tuple[int, ...]:
        """Indices of users with a minimum-rate requirement."""
        return tuple(k for k, d in enumerate(self.min_rates) if d > 0)

    @property
    def max_weight(self) -> float:
        return max(self.weights)

    def relaxed(self, weights: tuple[float, ...] | None = None) -> "ProblemInstance":
        """Copy without minimum-rate constraints, optionally with new weights."""
        return self.model_copy(
            update={
                "min_rates": (0.0,) * self.num_users,
                "weights": tuple(weights) if weights is not None else self.weights,
            }
        )


class SolverParams(BaseModel):
    """Projected subgradient settings for the dual solver."""

    model_config = ConfigDict(extra="forbid")

    step: float = Field(default=0.01, gt=0)
    # "adaptive" halves the step after ``patience`` iterations without a
    # better dual value, at most ``max_halvings`` times.
    step_rule: StepRule = "adaptive"
    # "relative" measures residuals against their budgets and multipliers
    # against reference scales; "none" is the plain update with ``step``.
    scaling: StepScaling = "relative"
    relative_step: float = Field(default=0.2, gt=0)
    patience: int = Field(default=20, ge=1)
    max_halvings: int = Field(default=10, ge=0)
    eps_feas: float = Field(default=1e-3, gt=0)
    eps_comp: float = Field(default=1e-3, gt=0)
    # Relative distance between the upper bound and the best exactly
    # water-filled assignment seen, below which the solve stops.
    eps_gap: float = Field(default=1e-2, ge=0)
    primal_check: bool = True
    lambda_min: float = Field(default=1e-9, gt=0)
    mu_max: float | None = Field(default=None, gt=0)  # None -> 1e3 * max weight
    max_iterations: int = Field(default=2000, ge=1)

    def resolved_mu_max(self, instance: ProblemInstance) -> float:
        return self.mu_max if self.mu_max is not None else 1e3 * instance.max_weight


class RecoveryParams(BaseModel):
    """Settings for the feasible-point search around the dual solution."""

    model_config = ConfigDict(extra="forbid")

    mu_step: float | None = Field(default=None, gt=0)  # None -> 0.05 * max weight
    max_outer: int = Field(default=200, ge=1)

    def resolved_mu_step(self, instance: ProblemInstance) -> float:
        return self.mu_step if self.mu_step is not None else 0.05 * instance.max_weight


class WeightParams(BaseModel):
    """Settings for the weight-adjustment heuristic."""

    model_config = ConfigDict(extra="forbid")

    epsilon: float = Field(default=0.1, gt=0, le=1)
    max_iterations: int = Field(default=50, ge=1)
    solver: SolverParams | None = None  # None -> the scenario solver settings


class OracleParams(BaseModel):
    """Settings for exhaustive enumeration on small instances."""

    model_config = ConfigDict(extra="forbid")

    enabled: bool = False
    assignment_budget: int = Field(default=1_000_000, ge=1)


class InstanceConfig(BaseModel):
    """Scenario-level description of an instance, in engineering units."""

    model_config = ConfigDict(extra="forbid")

    num_users: int = Field(default=16, ge=1)
    num_subcarriers: int = Field(default=16, ge=1)
    num_antennas: int = Field(default=3, ge=1)
    power_budget_dbm: float = 20.0
    noise_power_dbm: float = 0.0
    num_rt_users: int = Field(default=1, ge=0)
    min_rate: float = Field(default=40.0, ge=0)  # per RT user, bps/Hz
    min_rates: list[float] | None = None  # explicit per-user override
    weights: list[float] | None = None
    rt_attenuation_db: float = Field(default=0.0, ge=0)
    attenuation_db: list[float] | None = None  # explicit per-user override

    @model_validator(mode="after")
    def _check_users(self) -> "InstanceConfig":
        if self.num_rt_users > self.num_users:
            raise ValueError(
                f"num_rt_users ({self.num_rt_users}) exceeds num_users ({self.num_users})"
            )
        for name in ("min_rates", "weights", "attenuation_db"):
            values = getattr(self, name)
            if values is not None and len(values) != self.num_users:
                raise ValueError(
                    f"{name} has {len(values)} entries, expected {self.num_users}"
                )
        if self.attenuation_db is not None and any(a < 0 for a in self.attenuation_db):
            raise ValueError("attenuation_db entries must be non-negative")
        return self

    @property
    def power_budget(self) -> float:
        return dbm_to_linear(self.power_budget_dbm, self.noise_power_dbm)

    def user_min_rates(self) -> list[float]:
        if self.min_rates is not None:
            return list(self.min_rates)
        return [
            self.min_rate if k < self.num_rt_users else 0.0
            for k in range(self.num_users)
        ]

    def user_attenuations_db(self) -> list[float]:
        if self.attenuation_db is not None:
            return list(self.attenuation_db)
        rates = self.user_min_rates()
        return [self.rt_attenuation_db if d > 0 else 0.0 for d in rates]

    def to_instance(self) -> ProblemInstance:
        return ProblemInstance.build(
            num_users=self.num_users,
            num_subcarriers=self.num_subcarriers,
            num_antennas=self.num_antennas,
            power_budget=self.power_budget,
            min_rates=self.user_min_rates(),
            weights=self.weights,
        )


class SweepSpec(BaseModel):
    """Which instance parameter a scenario varies, and over which values."""

    model_config = ConfigDict(extra="forbid")

    parameter: SweepParameter = "none"
    values: list[float] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_values(self) -> "SweepSpec":
        if self.parameter != "none" and not self.values:
            raise ValueError(f"sweep over {self.parameter} needs at least one value")
        return self

    def points(self) -> list[float | None]:
        if self.parameter == "none":
            return [None]
        return list(self.values)

    def apply(self, instance: InstanceConfig, value: float | None) -> InstanceConfig:
        """Instance configuration at one sweep point."""
        if value is None or self.parameter == "none":
            return instance
        update: dict[str, float | int] = {self.parameter: value}
        if self.parameter == "num_rt_users":
            update[self.parameter] = int(value)
        return InstanceConfig.model_validate(
            {**instance.model_dump(), **update}
        )


class ScenarioConfig(BaseModel):
    """Everything needed to reproduce one Monte Carlo experiment."""

    model_config = ConfigDict(extra="forbid")

    seed: int = Field(default=0, ge=0)
    realizations: int = Field(default=100, ge=1)
    timeout_s: float | None = Field(default=120.0, gt=0)
    threads: int = Field(default=1, ge=1)
    emit_trace: bool = False
    instance: InstanceConfig = Field(default_factory=InstanceConfig)
    sweep: SweepSpec = Field(default_factory=SweepSpec)
    solver: SolverParams = Field(default_factory=SolverParams)
    recovery: RecoveryParams = Field(default_factory=RecoveryParams)
    weights: WeightParams = Field(default_factory=WeightParams)
    oracle: OracleParams = Field(default_factory=OracleParams)
