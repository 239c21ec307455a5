"""zfbound: dual bounds and feasible allocations for zero-forcing OFDMA-SDMA.

Computes a Lagrangian upper bound on the weighted sum rate of a multi-antenna
OFDMA downlink with minimum-rate users, a feasible allocation recovered from
the dual solution, a weight-adjustment baseline, and an exhaustive oracle for
small systems.
"""

__version__ = "0.1.0"

from .dual import (
    DualEvaluation,
    DualPoint,
    DualSolution,
    eval_dual,
    power_allocation_fixed,
    set_score,
    solve_dual,
    user_power,
)
from .exceptions import (
    BudgetExceededError,
    ConfigurationError,
    InvalidInputError,
    RejectedSetError,
    SolverTimeoutError,
    UnboundedPowerError,
    WeakDualityError,
    ZFBoundError,
)
from .model import (
    Allocation,
    ChannelTensor,
    build_allocation,
    check_feasibility,
    generate_channels,
    zf_rate,
)
from .oracle import OracleResult, exact_enumeration
from .precompute import SdmaSet, SetPrecompute, enumerate_sdma_sets, precompute_all
from .recovery import RecoveryResult, gap_percent, recover_feasible
from .types import (
    InstanceConfig,
    OracleParams,
    ProblemInstance,
    RecoveryParams,
    ScenarioConfig,
    SolverParams,
    SweepSpec,
    WeightParams,
)
from .weights import WeightResult, weight_adjust

__all__ = [
    # Problem data
    "ProblemInstance",
    "ChannelTensor",
    "generate_channels",
    "zf_rate",
    "Allocation",
    "build_allocation",
    "check_feasibility",
    # Precompute
    "SdmaSet",
    "SetPrecompute",
    "enumerate_sdma_sets",
    "precompute_all",
    # Dual
    "DualPoint",
    "DualEvaluation",
    "DualSolution",
    "user_power",
    "set_score",
    "eval_dual",
    "solve_dual",
    "power_allocation_fixed",
    # Primal methods
    "RecoveryResult",
    "recover_feasible",
    "gap_percent",
    "WeightResult",
    "weight_adjust",
    "OracleResult",
    "exact_enumeration",
    # Configuration
    "InstanceConfig",
    "SweepSpec",
    "SolverParams",
    "RecoveryParams",
    "WeightParams",
    "OracleParams",
    "ScenarioConfig",
    # Exceptions
    "ZFBoundError",
    "InvalidInputError",
    "ConfigurationError",
    "UnboundedPowerError",
    "RejectedSetError",
    "BudgetExceededError",
    "SolverTimeoutError",
    "WeakDualityError",
]
