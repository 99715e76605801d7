"""Concentrated-liquidity pool engine."""

from .depth import band_reserves, depth_within, tvl
from .state import (
    FEE_TIERS_BP,
    LiquidityPosition,
    PoolConfig,
    PoolState,
    PriceFeed,
    TickRangeLiquidity,
)
from .swap import (
    SIDES,
    SwapResult,
    execute_swap,
    input_amount_for_usd,
    max_input_buy_x,
    max_input_sell_x,
    quote,
    swap_to_price,
    within_range_delta_x,
    within_range_delta_y,
)
from .tickmath import (
    MAX_TICK,
    MIN_TICK,
    align_down,
    amounts_for_liquidity,
    human_price,
    liquidity_from_token_x,
    liquidity_from_token_y,
    position_amounts,
    price_to_tick,
    raw_price,
    tick_to_price,
    tick_to_sqrt_price,
)

__all__ = [
    "FEE_TIERS_BP", "LiquidityPosition", "PoolConfig", "PoolState", "PriceFeed",
    "TickRangeLiquidity", "SIDES", "SwapResult", "execute_swap", "input_amount_for_usd",
    "max_input_buy_x", "max_input_sell_x", "quote", "swap_to_price",
    "within_range_delta_x", "within_range_delta_y", "MAX_TICK", "MIN_TICK", "align_down",
    "amounts_for_liquidity", "human_price", "liquidity_from_token_x", "liquidity_from_token_y",
    "position_amounts", "price_to_tick", "raw_price", "tick_to_price", "tick_to_sqrt_price",
    "band_reserves", "depth_within", "tvl",
]
