"""USD valuation of pool reserves: total value locked and depth near the market."""

from __future__ import annotations

from decimal import Decimal

from .._decimal import ZERO, high_precision, to_decimal
from ..exceptions import DomainError
from .state import PoolState, PriceFeed
from .tickmath import tick_to_sqrt_price


def _usd(state: PoolState, x: Decimal, y: Decimal, feed: PriceFeed) -> Decimal:
    cfg = state.config
    return (x * to_decimal(feed.usd_x) / Decimal(10) ** cfg.decimals_x
            + y * to_decimal(feed.usd_y) / Decimal(10) ** cfg.decimals_y)


@high_precision
def tvl(state: PoolState, price_feed: PriceFeed) -> Decimal:
    """Sum over ranges of ``x_i * P_x + y_i * P_y`` in USD."""
    x, y = state.total_reserves()
    return _usd(state, x, y, price_feed)


@high_precision
def band_reserves(state: PoolState, pct) -> tuple[Decimal, Decimal]:
    """Raw reserves held between ``p_mkt / (1 + pct)`` and ``p_mkt * (1 + pct)``.

    A range straddling a band edge contributes the reserves it would hold on
    the clipped interval, i.e. the band edge takes the place of the range
    bound in the reserve formulas. ``pct=inf`` yields the full reserves.
    """
    pct = to_decimal(pct)
    if pct <= 0:
        raise DomainError("pct must be positive")
    s = state.config.tick_spacing
    sp = state.market_price.sqrt()
    if pct.is_infinite():
        lo_band, hi_band = ZERO, None
    else:
        lo_band = sp / (1 + pct).sqrt()
        hi_band = sp * (1 + pct).sqrt()
    x_total = ZERO
    y_total = ZERO
    for tick in state.initialized_ticks():
        L = state.liquidity_at(tick)
        sa, sb = tick_to_sqrt_price(tick), tick_to_sqrt_price(tick + s)
        if sb <= lo_band or (hi_band is not None and sa >= hi_band):
            continue
        # X lives on the part of the range above the market price
        xa = max(sa, sp, lo_band)
        xb = sb if hi_band is None else min(sb, hi_band)
        if xa < xb:
            x_total += L / xa - L / xb
        # Y lives on the part below it
        ya = max(sa, lo_band)
        yb = min(sb, sp) if hi_band is None else min(sb, sp, hi_band)
        if ya < yb:
            y_total += L * (yb - ya)
    return x_total, y_total


@high_precision
def depth_within(state: PoolState, pct, price_feed: PriceFeed) -> Decimal:
    """USD value of the liquidity within ``pct`` of the market price."""
    x, y = band_reserves(state, pct)
    return _usd(state, x, y, price_feed)
