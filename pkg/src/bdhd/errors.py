"""Exception types raised by the bdhd package."""


class BDHDError(Exception):
    """Base class for all package errors."""


class InvalidPointError(BDHDError, ValueError):
    pass


class InstanceFormatError(BDHDError, ValueError):
    """Raised when an instance file does not parse; ``field`` names the offending path."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class StateSpaceTooLarge(BDHDError):
    """The exact DP table would exceed the configured entry budget."""

    def __init__(self, required: int, budget: int):
        self.required = required
        self.budget = budget
        super().__init__(
            f"DP table needs {required} entries (budget {budget}); "
            "use the edp or bnb solver instead"
        )


class InstanceTooLarge(BDHDError):
    def __init__(self, required: int, budget: int):
        self.required = required
        self.budget = budget
        super().__init__(f"brute force needs {required} assignments (budget {budget})")


class SolverNotFoundError(BDHDError):
    pass


class SolutionParseError(BDHDError):
    pass


class InvalidPlanError(BDHDError):
    def __init__(self, message: str, violations=None):
        self.violations = list(violations or [])
        super().__init__(message)
