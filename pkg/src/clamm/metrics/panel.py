"""Per-interval metrics panel built from a replayed event stream."""

from __future__ import annotations

import bisect
import csv
import io
import json
import math
from dataclasses import dataclass, field
from decimal import Decimal
from itertools import accumulate
from typing import Optional, Sequence

from .._decimal import high_precision
from ..amm.depth import tvl as pool_tvl
from ..amm.swap import SIDES
from ..ingest import ReplayResult, bucketize
from .costs import turnover
from .liquidity import DEFAULT_PCTS, DEFAULT_SIZES_USD, NO_PRICE, concentration, slippage_grid
from .repositioning import (ValuedMint, average, classify_repositioning, filter_jit, filter_outliers, gap,
                            intensity_freq, intensity_legacy, intensity_value, length, precision)

DAY_SECONDS = 86_400


@dataclass(frozen=True)
class MetricsParams:
    interval_seconds: int = 300
    pcts: tuple = DEFAULT_PCTS
    sizes_usd: tuple = DEFAULT_SIZES_USD
    jit_filter: bool = True
    outlier_cutoff: Optional[float] = 0.20
    weighted: bool = False
    window_seconds: int = 300
    volume_window_seconds: int = DAY_SECONDS

    def __post_init__(self):
        if self.interval_seconds <= 0 or self.window_seconds < 0 or self.volume_window_seconds <= 0:
            raise ValueError("interval, window and volume window must be positive")
        if not self.pcts or any(p <= 0 for p in self.pcts):
            raise ValueError("pcts must be positive")
        if any(s <= 0 for s in self.sizes_usd):
            raise ValueError("trade sizes must be positive")
        if self.outlier_cutoff is not None and self.outlier_cutoff < 0:
            raise ValueError("outlier cutoff must be nonnegative")


def pct_label(pct) -> str:
    return f"conc_{format(float(pct) * 100, 'g')}pct"


def size_label(size) -> str:
    size = float(size)
    return str(int(size)) if size.is_integer() else repr(size)


def columns(pcts: Sequence = DEFAULT_PCTS, sizes_usd: Sequence = DEFAULT_SIZES_USD) -> list[str]:
    """Fixed CSV column order for a given concentration band set and size grid."""
    cols = ["interval_start"]
    cols += [pct_label(p) for p in pcts]
    cols += ["intensity_value", "intensity_freq", "intensity_legacy", "gap_avg", "length_avg",
             "precision_avg", "tvl_usd", "volume_24h_usd", "turnover"]
    cols += [f"slippage_{size_label(s)}_{side}_bp" for s in sizes_usd for side in SIDES]
    return cols


@dataclass
class MetricsRow:
    interval_start: int
    interval_end: int
    concentration: dict  # pct -> fraction (None without prices)
    intensity_value: float
    intensity_freq: float
    intensity_legacy: float
    gap: Optional[float]
    length: Optional[float]
    precision: Optional[float]
    tvl_usd: Optional[float]
    volume_24h_usd: Optional[float]
    turnover: Optional[float]
    slippage: dict  # (size, side) -> bp or None
    slippage_reasons: dict = field(default_factory=dict)
    n_mints: int = 0
    n_repositioning: int = 0

    def conc(self, pct) -> Optional[float]:
        return self.concentration.get(pct)

    def values(self) -> list:
        """Values in :func:`columns` order."""
        out = [self.interval_start]
        out += [self.concentration.get(p) for p in self.concentration]
        out += [self.intensity_value, self.intensity_freq, self.intensity_legacy, self.gap, self.length,
                self.precision, self.tvl_usd, self.volume_24h_usd, self.turnover]
        out += list(self.slippage.values())
        return out

    def to_dict(self) -> dict:
        pcts = list(self.concentration)
        sizes = list(dict.fromkeys(size for size, _ in self.slippage))
        return dict(zip(columns(pcts, sizes), self.values()))


@dataclass
class Panel:
    rows: list
    summary: dict


def _usd(amount: Decimal, decimals: int, usd: Decimal) -> float:
    return float(abs(amount) * usd / Decimal(10) ** decimals)


@high_precision
def _value(cfg, amount_x, amount_y, feed) -> Optional[float]:
    if feed is None:
        return None
    return _usd(amount_x, cfg.decimals_x, feed.usd_x) + _usd(amount_y, cfg.decimals_y, feed.usd_y)


def _swap_input_usd(cfg, step, feed) -> Optional[float]:
    if feed is None:
        return None
    ev = step.event
    if ev.amount_x > 0:
        return _usd(ev.amount_x, cfg.decimals_x, feed.usd_x)
    return _usd(ev.amount_y, cfg.decimals_y, feed.usd_y)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "" if math.isnan(value) else repr(value)
    return str(value)


def compute_metrics(replayed: ReplayResult, price_feed, params: MetricsParams = MetricsParams(),
                    initial_snapshot=None, start: Optional[int] = None, end: Optional[int] = None) -> Panel:
    """Compute one :class:`MetricsRow` per interval of a replayed stream.

    ``price_feed`` is any object with ``at(timestamp)`` returning a
    :class:`~clamm.amm.state.PriceFeed` (or None when no price is known).
    JIT and outlier filters apply to the LP measures only; the pool state
    always reflects every event.
    """
    steps = list(replayed.steps)
    cfg = replayed.final_state.config
    events = [s.event for s in steps]
    by_key = {s.event.key: s for s in steps}

    lp_events = events
    jit_dropped = 0
    if params.jit_filter:
        res = filter_jit(lp_events)
        lp_events, jit_dropped = res.events, res.dropped
    outliers_dropped = missing_price = 0
    if params.outlier_cutoff is not None:
        prices = {k: s.price_before for k, s in by_key.items()}
        res = filter_outliers(lp_events, prices, params.outlier_cutoff)
        lp_events, outliers_dropped, missing_price = res.events, res.dropped, res.missing_price
    lp_keys = {ev.key for ev in lp_events if ev.kind in ("mint", "burn")}
    classification = classify_repositioning(lp_events, params.window_seconds)

    swap_ts: list[int] = []
    swap_usd: list[float] = []
    unvalued = 0
    for s in steps:
        if s.event.kind == "swap":
            v = _swap_input_usd(cfg, s, price_feed.at(s.event.timestamp))
            if v is None:
                unvalued += 1
                continue
            swap_ts.append(s.event.timestamp)
            swap_usd.append(v)
    cum = [0.0] + list(accumulate(swap_usd))

    buckets = bucketize(steps, params.interval_seconds, start=start, end=end, initial_snapshot=initial_snapshot)
    rows = []
    for b in buckets:
        mints: list[ValuedMint] = []
        minted = burned = 0.0
        for s in b.steps:
            ev = s.event
            if ev.key not in lp_keys:
                continue
            value = _value(cfg, s.amount_x, s.amount_y, price_feed.at(ev.timestamp))
            if value is None:
                unvalued += 1
                continue
            if ev.kind == "mint":
                mints.append(ValuedMint(ev, value, ev.key in classification.repositioning, s.price_before))
                minted += value
            else:
                burned += value
        rep = [m for m in mints if m.repositioning]
        gaps = [gap(m.event, m.market_price) for m in rep]
        lengths = [length(m.event) for m in rep]
        precs = [precision(g, ln) for g, ln in zip(gaps, lengths)]
        weights = [m.value_usd for m in rep] if params.weighted else None

        snap = b.end_snapshot
        feed = price_feed.at(b.end_ts - 1)
        if feed is None:
            conc = {p: None for p in params.pcts}
            tvl_usd = None
            grid_values = {(sz, side): None for sz in params.sizes_usd for side in SIDES}
            grid_reasons = {cell: NO_PRICE for cell in grid_values}
        else:
            conc = {p: concentration(snap, p, feed) for p in params.pcts}
            tvl_usd = float(pool_tvl(snap, feed))
            grid = slippage_grid(snap, params.sizes_usd, feed)
            grid_values, grid_reasons = grid.values, grid.reasons
        lo = bisect.bisect_left(swap_ts, b.end_ts - params.volume_window_seconds)
        hi = bisect.bisect_left(swap_ts, b.end_ts)
        volume = cum[hi] - cum[lo]
        rows.append(MetricsRow(
            interval_start=b.start_ts,
            interval_end=b.end_ts,
            concentration=conc,
            intensity_value=intensity_value(mints),
            intensity_freq=intensity_freq(mints),
            intensity_legacy=intensity_legacy(minted, burned),
            gap=average(gaps, weights),
            length=average(lengths, weights),
            precision=average(precs, weights),
            tvl_usd=tvl_usd,
            volume_24h_usd=volume,
            turnover=None if tvl_usd is None else turnover(volume, tvl_usd),
            slippage=grid_values,
            slippage_reasons=grid_reasons,
            n_mints=len(mints),
            n_repositioning=len(rep),
        ))
    summary = {
        "rows": len(rows),
        "events": len(steps),
        "jit_dropped": jit_dropped,
        "outliers_dropped": outliers_dropped,
        "missing_price_dropped": missing_price,
        "owner_missing_skipped": classification.skipped,
        "unvalued_events": unvalued,
        "reconciliation_warnings": replayed.reconciliation_warnings,
    }
    return Panel(rows, summary)


def write_csv(rows: Sequence[MetricsRow], out, pcts: Sequence = DEFAULT_PCTS,
              sizes_usd: Sequence = DEFAULT_SIZES_USD) -> None:
    """Write rows as CSV; absent values are empty fields. An empty panel is header-only."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns(pcts, sizes_usd))
    for row in rows:
        writer.writerow([_fmt(v) for v in row.values()])


def write_jsonl(rows: Sequence[MetricsRow], out) -> None:
    """One JSON object per row, keys in CSV column order, absent values as null."""
    for row in rows:
        out.write(json.dumps(row.to_dict(), allow_nan=False) + "\n")


def to_csv_string(rows: Sequence[MetricsRow], pcts: Sequence = DEFAULT_PCTS,
                  sizes_usd: Sequence = DEFAULT_SIZES_USD) -> str:
    buf = io.StringIO()
    write_csv(rows, buf, pcts, sizes_usd)
    return buf.getvalue()
