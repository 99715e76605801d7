"""Market-quality measures over pool snapshots and event streams."""

from .costs import GAS_UNITS_PER_SWAP, gas_fee_usd, turnover
from .liquidity import (DEFAULT_PCTS, DEFAULT_SIZES_USD, EXHAUSTED, NO_PRICE, SlippageGrid, concentration,
                        slippage_grid)
from .panel import MetricsParams, MetricsRow, Panel, columns, compute_metrics, to_csv_string, write_csv, write_jsonl
from .repositioning import (Classification, FilterResult, ValuedMint, average, classify_repositioning, filter_jit,
                            filter_outliers, gap, gap_from_prices, intensity_freq, intensity_legacy, intensity_value,
                            length, length_from_prices, mid_price, precision)

__all__ = [
    "GAS_UNITS_PER_SWAP", "gas_fee_usd", "turnover",
    "DEFAULT_PCTS", "DEFAULT_SIZES_USD", "EXHAUSTED", "NO_PRICE", "SlippageGrid", "concentration", "slippage_grid",
    "MetricsParams", "MetricsRow", "Panel", "columns", "compute_metrics", "to_csv_string", "write_csv",
    "write_jsonl",
    "Classification", "FilterResult", "ValuedMint", "average", "classify_repositioning", "filter_jit",
    "filter_outliers", "gap", "gap_from_prices", "intensity_freq", "intensity_legacy", "intensity_value",
    "length", "length_from_prices", "mid_price", "precision",
]
