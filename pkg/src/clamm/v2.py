"""Constant-product (x * y = k) pool used as an analytical baseline.

Amounts are in whole token units; there is no fee. The pool is an immutable
value: swaps return a result and :meth:`V2Pool.apply` builds the next pool.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal

from ._decimal import high_precision, to_decimal
from .amm.swap import BP, SIDES, SwapResult
from .exceptions import DomainError, ValidationError

_RATIO_TOL = Decimal("1e-12")


@dataclass(frozen=True)
class V2Pool:
    reserve_x: Decimal
    reserve_y: Decimal

    def __post_init__(self):
        if self.reserve_x <= 0 or self.reserve_y <= 0:
            raise DomainError("v2 reserves must be positive")

    @property
    def k(self) -> Decimal:
        return self.reserve_x * self.reserve_y

    @property
    def price(self) -> Decimal:
        """Price of X in units of Y."""
        return self.reserve_y / self.reserve_x

    @classmethod
    @high_precision
    def from_tvl(cls, tvl_usd, usd_x, usd_y) -> "V2Pool":
        """Balanced pool holding half its TVL in each token."""
        tvl = to_decimal(tvl_usd)
        if tvl <= 0:
            raise DomainError("TVL must be positive")
        return cls(tvl / (2 * to_decimal(usd_x)), tvl / (2 * to_decimal(usd_y)))

    def apply(self, result: SwapResult) -> "V2Pool":
        return V2Pool(self.reserve_x + result.delta_x, self.reserve_y + result.delta_y)

    @high_precision
    def tvl(self, usd_x, usd_y) -> Decimal:
        return self.reserve_x * to_decimal(usd_x) + self.reserve_y * to_decimal(usd_y)


@high_precision
def v2_swap(pool: V2Pool, delta_in, side: str) -> SwapResult:
    """Exact-input swap preserving ``x * y = k``.

    ``buy_x`` adds ``delta_in`` of Y, ``sell_x`` adds ``delta_in`` of X.
    """
    amount = to_decimal(delta_in)
    if amount <= 0:
        raise ValidationError("swap input must be positive")
    x, y = pool.reserve_x, pool.reserve_y
    if side == "buy_x":
        dy = amount
        dx = -x * dy / (y + dy)
    elif side == "sell_x":
        dx = amount
        dy = -y * dx / (x + dx)
    else:
        raise ValidationError(f"side must be one of {SIDES}, got {side!r}")
    p_avg = abs(dy / dx)
    p_mkt = pool.price
    return SwapResult(
        side=side,
        delta_x=dx,
        delta_y=dy,
        average_price=p_avg,
        average_price_adj=p_avg,
        slippage_bp=abs(p_avg / p_mkt - 1) * BP,
        ticks_crossed=0,
        fee_paid=Decimal(0),
        price_before=p_mkt,
        price_after=(y + dy) / (x + dx),
    )


@high_precision
def v2_swap_usd(pool: V2Pool, q_usd, side: str, usd_x, usd_y) -> SwapResult:
    """Swap of USD size ``q_usd`` (valued in the input token)."""
    q = to_decimal(q_usd)
    price = to_decimal(usd_y if side == "buy_x" else usd_x)
    return v2_swap(pool, q / price, side)


@high_precision
def v2_closed_form_slippage(tvl_usd, q_usd, side: str) -> Decimal:
    """Slippage (as a fraction) of a USD-``q`` trade on a balanced v2 pool.

    Buying X costs ``2q / TVL``; selling X costs ``q / (q + TVL / 2)``.
    """
    tvl = to_decimal(tvl_usd)
    q = to_decimal(q_usd)
    if tvl <= 0 or q <= 0:
        raise DomainError("TVL and trade size must be positive")
    if side == "buy_x":
        return 2 * q / tvl
    if side == "sell_x":
        return q / (q + tvl / 2)
    raise ValidationError(f"side must be one of {SIDES}, got {side!r}")


@high_precision
def v2_mint(pool: V2Pool, add_x, add_y) -> V2Pool:
    """Deposit liquidity; deposits must match the pool's reserve ratio (50-50 by value)."""
    ax, ay = to_decimal(add_x), to_decimal(add_y)
    if ax <= 0 or ay <= 0:
        raise ValidationError("v2 deposits must be positive in both tokens")
    if abs(ay / ax / pool.price - 1) > _RATIO_TOL:
        raise ValidationError("v2 deposit must be in the pool's reserve ratio")
    return V2Pool(pool.reserve_x + ax, pool.reserve_y + ay)
