"""Exceptions raised while modelling and evaluating the channel."""

from typing import Any


class CmaccError(Exception):
    """Base class for every error raised by this package."""


class DomainError(CmaccError, ValueError):
    """The channel model or one of its inputs is invalid."""


class NumericError(CmaccError, ArithmeticError):
    """A numerically ill-posed evaluation was requested."""


class InvalidTaps(DomainError):
    """An impulse response is empty or holds a non-finite tap."""


class InvalidNoise(DomainError):
    """A noise autocorrelation does not describe a valid stationary process."""


class InvalidPower(DomainError):
    """A power budget is negative or not finite."""


class InvalidAllocation(DomainError):
    """A spectral allocation breaks symmetry, sign or range requirements."""


class BlockTooShort(DomainError):
    """The block length does not exceed the channel memory."""


class LengthMismatch(DomainError):
    """Two blocks that must share a length do not."""


class DimensionMismatch(DomainError):
    """An allocation and a sub-channel set disagree on the block length."""


class IndefinitePeriodization(DomainError):
    """Folding the autocorrelation into one block produced a negative eigenvalue."""


class BudgetViolated(DomainError):
    """A spectral allocation spends more than its power budget."""


class ConditionNotVerified(DomainError):
    """The strong interference condition has not been established."""


class InfiniteRate(NumericError):
    """A noiseless sub-channel receives positive signal power."""


class SingularNoise(NumericError):
    """A noise covariance matrix is singular."""


class ZeroChannel(NumericError):
    """Every sub-channel has zero gain but a positive budget was given."""

    def __init__(self, message: str, allocation: Any, capacity: float = 0.0) -> None:
        super().__init__(message)
        self.allocation = allocation
        self.capacity = capacity


__all__ = [
    "CmaccError",
    "DomainError",
    "NumericError",
    "InvalidTaps",
    "InvalidNoise",
    "InvalidPower",
    "InvalidAllocation",
    "BlockTooShort",
    "LengthMismatch",
    "DimensionMismatch",
    "IndefinitePeriodization",
    "BudgetViolated",
    "ConditionNotVerified",
    "InfiniteRate",
    "SingularNoise",
    "ZeroChannel",
]
