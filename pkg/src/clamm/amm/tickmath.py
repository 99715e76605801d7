"""Tick <-> price conversion and single-position reserve formulas.

Prices are raw on-chain prices of token X in units of token Y. A tick ``i``
sits at price ``1.0001 ** i``.
"""

from __future__ import annotations

import decimal
from decimal import Decimal
from functools import lru_cache

from .._decimal import CONTEXT, PRECISION, ZERO, high_precision, to_decimal
from ..exceptions import DomainError

MIN_TICK = -887272
MAX_TICK = 887272
TICK_BASE = Decimal("1.0001")

_WORK_CONTEXT = decimal.Context(prec=PRECISION + 20, rounding=decimal.ROUND_HALF_EVEN,
                                Emin=-999999, Emax=999999)


def _check_tick(i: int) -> int:
    if not isinstance(i, int) or isinstance(i, bool):
        raise DomainError(f"tick must be an integer, got {i!r}")
    if i < MIN_TICK or i > MAX_TICK:
        raise DomainError(f"tick {i} outside [{MIN_TICK}, {MAX_TICK}]")
    return i


@lru_cache(maxsize=65536)
def _tick_power(i: int) -> Decimal:
    # square-and-multiply with guard digits, rounded once at the end
    with decimal.localcontext(_WORK_CONTEXT):
        n = abs(i)
        result = Decimal(1)
        base = TICK_BASE
        while n:
            if n & 1:
                result *= base
            base *= base
            n >>= 1
        if i < 0:
            result = 1 / result
    return CONTEXT.plus(result)


@lru_cache(maxsize=65536)
def _tick_sqrt(i: int) -> Decimal:
    with decimal.localcontext(_WORK_CONTEXT):
        root = _tick_power(i).sqrt()
    return CONTEXT.plus(root)


def tick_to_price(i: int) -> Decimal:
    """Raw price ``1.0001 ** i``.

    Raises:
        DomainError: if ``i`` is not an integer within the admissible tick bounds.
    """
    return _tick_power(_check_tick(i))


def tick_to_sqrt_price(i: int) -> Decimal:
    return _tick_sqrt(_check_tick(i))


@high_precision
def price_to_tick(price) -> int:
    """Largest tick ``i`` with ``1.0001 ** i <= price``."""
    p = to_decimal(price)
    if p <= 0:
        raise DomainError(f"price must be positive, got {p}")
    guess = int((p.ln() / TICK_BASE.ln()).to_integral_value(rounding=decimal.ROUND_FLOOR))
    guess = max(MIN_TICK, min(MAX_TICK, guess))
    while guess > MIN_TICK and _tick_power(guess) > p:
        guess -= 1
    while guess < MAX_TICK and _tick_power(guess + 1) <= p:
        guess += 1
    if _tick_power(guess) > p or (guess == MAX_TICK and p >= _tick_power(MAX_TICK) * TICK_BASE):
        raise DomainError(f"price {p} outside the representable tick range")
    return guess


def align_down(tick: int, spacing: int) -> int:
    """Lower bound of the elementary range ``[i, i + spacing)`` holding ``tick``."""
    return tick - tick % spacing


@high_precision
def human_price(raw_price, decimals_x: int, decimals_y: int) -> Decimal:
    """Human-readable price: raw price scaled by ``10 ** (decimals_y - decimals_x)``."""
    return to_decimal(raw_price) / Decimal(10) ** (decimals_y - decimals_x)


@high_precision
def raw_price(human, decimals_x: int, decimals_y: int) -> Decimal:
    return to_decimal(human) * Decimal(10) ** (decimals_y - decimals_x)


@high_precision
def amounts_for_liquidity(liquidity, sqrt_lower: Decimal, sqrt_upper: Decimal,
                          sqrt_market: Decimal) -> tuple[Decimal, Decimal]:
    """Real reserves ``(x, y)`` held by liquidity ``L`` on ``[p_lower, p_upper]``.

    The market price is clamped into the range (the piecewise ``z`` rule), so a
    range entirely above the market holds only X and one entirely below holds
    only Y.
    """
    L = to_decimal(liquidity)
    sz = min(max(sqrt_market, sqrt_lower), sqrt_upper)
    x = L / sz - L / sqrt_upper
    y = L * (sz - sqrt_lower)
    if x <= 0:
        x = ZERO
    if y <= 0:
        y = ZERO
    return x, y


def _sqrt(value: Decimal) -> Decimal:
    return CONTEXT.sqrt(value)


@high_precision
def position_amounts(position, market_price) -> tuple[Decimal, Decimal]:
    """Token amounts ``(x_pos, y_pos)`` locked by a position at ``market_price``."""
    return amounts_for_liquidity(
        position.liquidity,
        tick_to_sqrt_price(position.tick_lower),
        tick_to_sqrt_price(position.tick_upper),
        _sqrt(to_decimal(market_price)),
    )


@high_precision
def liquidity_from_token_y(y_amount, tick_lower: int, tick_upper: int, market_price) -> Decimal:
    """Invert the Y-reserve formula: ``L = y / (sqrt(z) - sqrt(p_lower))``."""
    y = to_decimal(y_amount)
    if y <= 0:
        raise DomainError("y_amount must be positive")
    p = to_decimal(market_price)
    if p <= tick_to_price(tick_lower):
        raise DomainError("market price at or below p_lower: the range holds no token Y")
    sz = min(_sqrt(p), tick_to_sqrt_price(tick_upper))
    return y / (sz - tick_to_sqrt_price(tick_lower))


@high_precision
def liquidity_from_token_x(x_amount, tick_lower: int, tick_upper: int, market_price) -> Decimal:
    """Invert the X-reserve formula: ``L = x / (1/sqrt(z) - 1/sqrt(p_upper))``."""
    x = to_decimal(x_amount)
    if x <= 0:
        raise DomainError("x_amount must be positive")
    p = to_decimal(market_price)
    if p >= tick_to_price(tick_upper):
        raise DomainError("market price at or above p_upper: the range holds no token X")
    sz = max(_sqrt(p), tick_to_sqrt_price(tick_lower))
    return x / (1 / sz - 1 / tick_to_sqrt_price(tick_upper))
