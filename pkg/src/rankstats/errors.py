"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input is outside the mathematical domain of the operation."""


class RangeLimitError(DomainError):
    """An input or result exceeds the configured working bound."""


class VerificationError(Exception):
    """A certificate failed independent recomputation.

    ``clause`` names the first check that failed.
    """

    def __init__(self, clause: str, message: str):
        super().__init__(message)
        self.clause = clause


class InsufficientInputError(ValueError):
    """A construction was asked for more primes than are available."""

    def __init__(self, available: int, needed: int):
        super().__init__(
            f"need at least {needed} qualifying primes, only {available} available"
        )
        self.available = available
        self.needed = needed
