"""High-precision Decimal context used by every engine computation."""

from __future__ import annotations

import decimal
import functools
import numbers
from decimal import Decimal

PRECISION = 60

CONTEXT = decimal.Context(
    prec=PRECISION,
    rounding=decimal.ROUND_HALF_EVEN,
    Emin=-999999,
    Emax=999999,
    traps=[decimal.InvalidOperation, decimal.DivisionByZero, decimal.Overflow],
)

ZERO = Decimal(0)
ONE = Decimal(1)


def high_precision(func):
    """Run ``func`` inside the package Decimal context."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        with decimal.localcontext(CONTEXT):
            return func(*args, **kwargs)

    return wrapper


def to_decimal(value) -> Decimal:
    """Convert ints, strings, floats and Decimals without binary artefacts.

    Floats go through ``repr`` so ``0.1`` becomes ``Decimal('0.1')``.
    """
    if isinstance(value, Decimal):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not numeric amounts")
    if isinstance(value, numbers.Integral):
        return Decimal(int(value))
    if isinstance(value, float):
        return Decimal(repr(float(value)))
    if isinstance(value, str):
        try:
            return Decimal(value.strip())
        except decimal.InvalidOperation as exc:
            raise ValueError(f"not a decimal number: {value!r}") from exc
    raise TypeError(f"cannot convert {type(value).__name__} to Decimal")


def canonical(value: Decimal) -> str:
    """Stable plain-notation string: numerically equal values print identically."""
    if value == 0:
        return "0"
    text = format(value.normalize(CONTEXT), "f")
    return text
