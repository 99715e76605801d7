"""Snapshot-level liquidity measures: concentration and slippage grids."""

from __future__ import annotations

from typing import NamedTuple, Optional, Sequence

from .._decimal import high_precision
from ..amm.depth import depth_within, tvl
from ..amm.state import PoolState, PriceFeed
from ..amm.swap import SIDES, quote
from ..exceptions import LiquidityExhausted

DEFAULT_PCTS = (0.01, 0.02, 0.10)
DEFAULT_SIZES_USD = (100, 500, 1_000, 5_000, 10_000, 50_000, 100_000)

EXHAUSTED = "liquidity_exhausted"
NO_PRICE = "no_price"


@high_precision
def concentration(snapshot: PoolState, pct, price_feed: PriceFeed) -> float:
    """Depth within ``pct`` of the market price divided by TVL (0 for an empty pool)."""
    total = tvl(snapshot, price_feed)
    if total <= 0:
        return 0.0
    return float(depth_within(snapshot, pct, price_feed) / total)


class SlippageGrid(NamedTuple):
    values: dict  # (size_usd, side) -> slippage in bp, None when absent
    reasons: dict  # (size_usd, side) -> reason code for absent cells

    def get(self, size, side) -> Optional[float]:
        return self.values.get((size, side))


def slippage_grid(snapshot: PoolState, sizes_usd: Sequence = DEFAULT_SIZES_USD,
                  price_feed: Optional[PriceFeed] = None, sides: Sequence[str] = SIDES) -> SlippageGrid:
    """Quote every (size, side) pair against ``snapshot``.

    Sizes the pool cannot fill are reported as absent with reason
    ``liquidity_exhausted``; without a price feed every cell is ``no_price``.
    """
    values = {}
    reasons = {}
    for size in sizes_usd:
        for side in sides:
            cell = (size, side)
            if price_feed is None:
                values[cell] = None
                reasons[cell] = NO_PRICE
                continue
            try:
                values[cell] = float(quote(snapshot, size, side, price_feed).slippage_bp)
            except LiquidityExhausted:
                values[cell] = None
                reasons[cell] = EXHAUSTED
    return SlippageGrid(values, reasons)
