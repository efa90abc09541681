"""Exception hierarchy shared by the engines and the ingestion layer."""

from __future__ import annotations


class DomainError(ValueError):
    """An input violates a mathematical precondition (non-positive price, bad size...)."""


class OutOfRangeError(DomainError):
    """A price lies outside the interval a computation is defined on."""


class InsufficientLiquidityError(DomainError):
    """A pool cannot absorb the requested input.

    ``max_input`` is the largest input the pool could have absorbed along the
    same path (in the same units as the request).
    """

    def __init__(self, message: str, max_input: float) -> None:
        super().__init__(message)
        self.max_input = max_input


class CapacityExceeded(DomainError):
    """A swap would push the price past the lower edge of a single interval.

    Carries the input consumed up to the boundary, so callers walking a tick
    grid can continue in the next interval.
    """

    def __init__(self, consumed: float, amount_out: float) -> None:
        super().__init__(f"interval capacity exceeded after {consumed!r} input")
        self.consumed = consumed
        self.amount_out = amount_out


class DepthError(DomainError):
    """An order book side is too thin for the requested size."""

    def __init__(self, message: str, available: float) -> None:
        super().__init__(message)
        self.available = available


class EmptyBookError(DomainError):
    pass


class CoverageError(DomainError):
    """A lookup stamp precedes the first point of a time series."""


class TripletError(DomainError):
    """Three legs that do not form a closed currency cycle."""


class UndefinedEquilibriumError(DomainError):
    """Expected impermanent loss of zero implies unbounded equilibrium liquidity."""


class FitError(DomainError):
    pass


class FormatError(Exception):
    """Fatal problem with an input file as a whole (missing header, unordered stamps)."""
