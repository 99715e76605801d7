"""Exception hierarchy shared by the engine, ingestion and CLI layers."""

from __future__ import annotations

from decimal import Decimal


class ClammError(Exception):
    """Base class for all package errors."""


class DomainError(ClammError, ValueError):
    """Input outside the mathematical domain of an operation."""


class ValidationError(ClammError, ValueError):
    """Structurally invalid input (misaligned ticks, bad config values, ...)."""


class PositionNotFound(ClammError, KeyError):
    pass


class LiquidityExhausted(ClammError):
    """Raised when a swap runs out of liquidity before its input is consumed.

    Carries the partial fill so callers can decide what to do with it. The pool
    state is never mutated when this is raised.
    """

    def __init__(self, side: str, requested: Decimal, filled_in: Decimal,
                 filled_out: Decimal, ticks_crossed: int) -> None:
        self.side = side
        self.requested = requested
        self.filled_in = filled_in
        self.filled_out = filled_out
        self.ticks_crossed = ticks_crossed
        super().__init__(
            f"liquidity exhausted on {side}: filled {filled_in} of {requested} "
            f"(output {filled_out}, {ticks_crossed} ticks crossed)"
        )


class EventParseError(ClammError):
    """File-level failure while parsing an event or price file."""


class ReplayError(ClammError):
    """An event cannot be applied to the pool state."""

    def __init__(self, message: str, event=None) -> None:
        self.event = event
        if event is not None:
            message = f"{message} (event block={event.block} log_index={event.log_index} ts={event.timestamp})"
        super().__init__(message)
