"""Exception classes for zfbound."""


class ZFBoundError(Exception):
    """Base exception for zfbound errors."""

    def __init__(self, message: str, code: str = "ZFBOUND_ERROR", exit_code: int = 2):
        super().__init__(message)
        self.message = message
        self.code = code
        self.exit_code = exit_code


class InvalidInputError(ZFBoundError):
    """Raised when array shapes, indices or values are invalid."""

    def __init__(self, message: str, code: str = "INVALID_INPUT"):
        super().__init__(message, code, 2)


class ConfigurationError(ZFBoundError):
    """Raised when configuration is invalid."""

    def __init__(self, message: str, code: str = "CONFIG_ERROR"):
        super().__init__(message, code, 1)


class UnboundedPowerError(ZFBoundError):
    """Raised when a zero power price would allocate unbounded power."""

    def __init__(
        self,
        message: str = "Power multiplier must be positive",
        code: str = "UNBOUNDED_POWER",
    ):
        super().__init__(message, code, 2)


class RejectedSetError(ZFBoundError):
    """Raised when an SDMA set without full row rank is scored."""

    def __init__(self, message: str, code: str = "REJECTED_SET"):
        super().__init__(message, code, 2)


class BudgetExceededError(ZFBoundError):
    """Raised when exhaustive enumeration would exceed its assignment budget."""

    def __init__(self, message: str, code: str = "BUDGET_EXCEEDED"):
        super().__init__(message, code, 2)


class SolverTimeoutError(ZFBoundError):
    """Raised when a solver runs past its wall-clock deadline."""

    def __init__(self, message: str = "Solver deadline exceeded", code: str = "TIMEOUT"):
        super().__init__(message, code, 2)


class WeakDualityError(ZFBoundError):
    """Raised when a feasible objective exceeds the dual upper bound."""

    def __init__(self, message: str, code: str = "WEAK_DUALITY"):
        super().__init__(message, code, 2)
