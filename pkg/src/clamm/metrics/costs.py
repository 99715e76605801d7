"""Transaction cost and activity ratios."""

from __future__ import annotations

from typing import Optional

GAS_UNITS_PER_SWAP = 120_000


def gas_fee_usd(gas_price_gwei: float, eth_usd: float, gas_units: int = GAS_UNITS_PER_SWAP) -> float:
    """USD gas fee: ``gas_units * gas_price_gwei * 1e-9 * eth_usd``."""
    if gas_price_gwei < 0 or eth_usd < 0 or gas_units < 0:
        raise ValueError("gas inputs must be nonnegative")
    return gas_units * gas_price_gwei * 1e-9 * eth_usd


def turnover(volume_24h_usd: float, tvl_usd: float) -> Optional[float]:
    """Volume over TVL; None when TVL is zero."""
    if volume_24h_usd < 0 or tvl_usd < 0:
        raise ValueError("volume and TVL must be nonnegative")
    if tvl_usd == 0:
        return None
    return volume_24h_usd / tvl_usd
