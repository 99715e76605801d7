"""Concentrated-liquidity AMM simulation and market-quality metrics."""

__version__ = "0.1.0"

from .amm import (PoolConfig, PoolState, PriceFeed, SwapResult, depth_within, execute_swap, quote,
                  swap_to_price, tick_to_price, tvl)
from .exceptions import (ClammError, DomainError, EventParseError, LiquidityExhausted, PositionNotFound,
                         ReplayError, ValidationError)
from .ingest import PoolEvent, bucketize, parse_events, replay
from .v2 import V2Pool, v2_closed_form_slippage, v2_swap

__all__ = [
    "PoolConfig", "PoolState", "PriceFeed", "SwapResult", "depth_within", "execute_swap", "quote",
    "swap_to_price", "tick_to_price", "tvl",
    "ClammError", "DomainError", "EventParseError", "LiquidityExhausted", "PositionNotFound", "ReplayError",
    "ValidationError",
    "PoolEvent", "bucketize", "parse_events", "replay",
    "V2Pool", "v2_closed_form_slippage", "v2_swap",
]
