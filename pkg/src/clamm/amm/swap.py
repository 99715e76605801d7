"""Exact-input swaps that walk elementary tick ranges.

Amounts follow the pool's point of view: tokens entering the pool are
positive, tokens leaving it negative. ``sell_x`` adds token X (price falls),
``buy_x`` adds token Y (price rises).
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal

from .._decimal import ONE, ZERO, high_precision, to_decimal
from ..exceptions import DomainError, LiquidityExhausted, ValidationError
from .state import PoolState, PriceFeed
from .tickmath import tick_to_price, tick_to_sqrt_price

SIDES = ("buy_x", "sell_x")
BP = Decimal(10000)


@dataclass(frozen=True)
class SwapResult:
    side: str
    delta_x: Decimal
    delta_y: Decimal
    average_price: Decimal
    average_price_adj: Decimal
    slippage_bp: Decimal
    ticks_crossed: int
    fee_paid: Decimal
    price_before: Decimal
    price_after: Decimal

    def to_dict(self) -> dict:
        return {
            "side": self.side,
            "delta_x": str(self.delta_x),
            "delta_y": str(self.delta_y),
            "average_price": str(self.average_price),
            "average_price_adj": str(self.average_price_adj),
            "slippage_bp": str(self.slippage_bp),
            "ticks_crossed": self.ticks_crossed,
            "fee_paid": str(self.fee_paid),
            "price_before": str(self.price_before),
            "price_after": str(self.price_after),
        }


# --------------------------------------------------------------------------
# Closed forms for a single elementary range with liquidity L, real reserves
# (x, y) and sqrt bound prices sa = sqrt(p_i), sb = sqrt(p_{i+s}).


@high_precision
def within_range_delta_y(delta_x: Decimal, L: Decimal, x: Decimal, y: Decimal,
                         sa: Decimal, sb: Decimal) -> Decimal:
    """Y leaving (negative) when ``delta_x`` of X is added inside one range."""
    return -delta_x * (y + L * sa) / (x + delta_x + L / sb)


@high_precision
def within_range_delta_x(delta_y: Decimal, L: Decimal, x: Decimal, y: Decimal,
                         sa: Decimal, sb: Decimal) -> Decimal:
    """X leaving (negative) when ``delta_y`` of Y is added inside one range."""
    return -delta_y * (x + L / sb) / (y + delta_y + L * sa)


@high_precision
def max_input_sell_x(L: Decimal, x: Decimal, y: Decimal, sa: Decimal, sb: Decimal) -> Decimal:
    """Most X the range absorbs before its Y reserve is gone."""
    return x * y / (L * sa) + y / (sa * sb)


@high_precision
def max_input_buy_x(L: Decimal, x: Decimal, y: Decimal, sa: Decimal, sb: Decimal) -> Decimal:
    """Most Y the range absorbs before its X reserve is gone."""
    return x * y * sb / L + x * sa * sb


# --------------------------------------------------------------------------


class _Walk:
    __slots__ = ("price", "amount_in", "amount_out", "crossed")

    def __init__(self, price):
        self.price = price
        self.amount_in = ZERO
        self.amount_out = ZERO
        self.crossed = 0


def _walk_sell_x(state: PoolState, amount: Decimal) -> tuple[_Walk, Decimal]:
    """Spend ``amount`` of X walking down. Returns the walk and the unspent remainder."""
    s = state.config.tick_spacing
    w = _Walk(state.market_price)
    i = state.market_range
    rem = amount
    while rem > 0:
        L = state.liquidity_at(i)
        if L > 0:
            x, y = state.range_reserves(i, w.price)
            if y > 0:
                sa, sb = tick_to_sqrt_price(i), tick_to_sqrt_price(i + s)
                dx_max = max_input_sell_x(L, x, y, sa, sb)
                if rem < dx_max:
                    dy = within_range_delta_y(rem, L, x, y, sa, sb)
                    w.amount_in += rem
                    w.amount_out += dy
                    sqrt_new = (y + dy) / L + sa
                    w.price = max(sqrt_new * sqrt_new, tick_to_price(i))
                    return w, ZERO
                w.amount_in += dx_max
                w.amount_out -= y
                rem -= dx_max
        w.price = tick_to_price(i)
        if rem <= 0:
            break
        below = state.next_initialized_below(i)
        if below is None:
            return w, rem
        w.crossed += (i - below) // s
        i = below
    return w, ZERO


def _walk_buy_x(state: PoolState, amount: Decimal) -> tuple[_Walk, Decimal]:
    s = state.config.tick_spacing
    w = _Walk(state.market_price)
    i = state.market_range
    rem = amount
    while rem > 0:
        L = state.liquidity_at(i)
        upper_price = tick_to_price(i + s)
        if L > 0:
            x, y = state.range_reserves(i, w.price)
            if x > 0:
                sa, sb = tick_to_sqrt_price(i), tick_to_sqrt_price(i + s)
                dy_max = max_input_buy_x(L, x, y, sa, sb)
                if rem < dy_max:
                    dx = within_range_delta_x(rem, L, x, y, sa, sb)
                    w.amount_in += rem
                    w.amount_out += dx
                    inv_sqrt_new = (x + dx) / L + ONE / sb
                    new_price = ONE / (inv_sqrt_new * inv_sqrt_new)
                    w.price = min(new_price, upper_price)
                    return w, ZERO
                w.amount_in += dy_max
                w.amount_out -= x
                rem -= dy_max
        w.price = upper_price
        if rem <= 0:
            break
        above = state.next_initialized_above(i)
        if above is None:
            return w, rem
        w.crossed += (above - i) // s
        i = above
    return w, ZERO


@high_precision
def execute_swap(state: PoolState, side: str, amount_in, commit: bool = True) -> SwapResult:
    """Exact-input swap of ``amount_in`` raw units of the input token.

    The fee (``fee_bp``) is taken from the input before the curve math and
    credited to the pool's fee ledger. ``delta_x``/``delta_y`` report the gross
    input, so slippage is what the trader experiences.

    Raises:
        ValidationError: nonpositive amount or unknown side.
        LiquidityExhausted: the walk ran out of liquidity; state is untouched.
    """
    if side not in SIDES:
        raise ValidationError(f"side must be one of {SIDES}, got {side!r}")
    amount = to_decimal(amount_in)
    if not amount.is_finite() or amount <= 0:
        raise ValidationError(f"swap input must be positive, got {amount}")
    fee = amount * state.config.fee_bp / BP
    net = amount - fee
    price_before = state.market_price
    walk, unspent = (_walk_sell_x if side == "sell_x" else _walk_buy_x)(state, net)
    if unspent > 0 or walk.amount_out == 0:
        raise LiquidityExhausted(side, amount, walk.amount_in, -walk.amount_out, walk.crossed)
    gross_in = walk.amount_in + fee
    if side == "sell_x":
        dx, dy = gross_in, walk.amount_out
    else:
        dx, dy = walk.amount_out, gross_in
    p_avg = abs(dy / dx)
    slippage = abs(p_avg / price_before - 1) * BP
    if commit:
        state._set_price(walk.price)
        if side == "sell_x":
            state.fees_x += fee
        else:
            state.fees_y += fee
    return SwapResult(
        side=side,
        delta_x=dx,
        delta_y=dy,
        average_price=p_avg,
        average_price_adj=state.config.human_price(p_avg),
        slippage_bp=slippage,
        ticks_crossed=walk.crossed,
        fee_paid=fee,
        price_before=price_before,
        price_after=walk.price,
    )


@high_precision
def input_amount_for_usd(state: PoolState, notional_usd, side: str, price_feed: PriceFeed) -> Decimal:
    """Raw input-token amount worth ``notional_usd``."""
    q = to_decimal(notional_usd)
    if q <= 0:
        raise ValidationError("notional must be positive")
    cfg = state.config
    if side == "sell_x":
        return q / to_decimal(price_feed.usd_x) * Decimal(10) ** cfg.decimals_x
    if side == "buy_x":
        return q / to_decimal(price_feed.usd_y) * Decimal(10) ** cfg.decimals_y
    raise ValidationError(f"side must be one of {SIDES}, got {side!r}")


def quote(state: PoolState, notional_usd, side: str, price_feed: PriceFeed) -> SwapResult:
    """Hypothetical swap of ``notional_usd``; the pool state is left untouched."""
    amount = input_amount_for_usd(state, notional_usd, side, price_feed)
    return execute_swap(state, side, amount, commit=False)


@high_precision
def swap_to_price(state: PoolState, target_price, charge_fee: bool = False) -> tuple[Decimal, Decimal]:
    """Move the market price to ``target_price`` and return ``(delta_x, delta_y)``.

    Models an arbitrageur trading the pool to an external price. Ranges
    without liquidity are crossed at no cost. Fees are charged on the input
    only when ``charge_fee`` is set.
    """
    target = to_decimal(target_price)
    if target <= 0:
        raise DomainError("target price must be positive")
    start = state.market_price
    if target == start:
        return ZERO, ZERO
    s = state.config.tick_spacing
    dx_total = ZERO
    dy_total = ZERO
    if target < start:
        for tick in reversed(state.initialized_ticks()):
            lo, hi = tick_to_price(tick), tick_to_price(tick + s)
            if hi <= target or lo >= start:
                continue
            a = max(lo, target).sqrt()
            b = min(hi, start).sqrt()
            L = state.liquidity_at(tick)
            dx_total += L / a - L / b
            dy_total -= L * (b - a)
    else:
        for tick in state.initialized_ticks():
            lo, hi = tick_to_price(tick), tick_to_price(tick + s)
            if lo >= target or hi <= start:
                continue
            a = max(lo, start).sqrt()
            b = min(hi, target).sqrt()
            L = state.liquidity_at(tick)
            dy_total += L * (b - a)
            dx_total -= L / a - L / b
    if charge_fee and state.config.fee_bp:
        rate = Decimal(state.config.fee_bp) / BP
        if dx_total > 0:
            fee = dx_total * rate / (1 - rate)
            dx_total += fee
            state.fees_x += fee
        elif dy_total > 0:
            fee = dy_total * rate / (1 - rate)
            dy_total += fee
            state.fees_y += fee
    state._set_price(target)
    return dx_total, dy_total
