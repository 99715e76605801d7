"""Liquidity-provider repositioning measures and the event filters applied before them.

A *repositioning mint* is a mint by an LP who burned in the same pool within
the preceding window (five minutes by default). Each burn justifies at most
one mint; mints are matched earliest-first against the oldest still-valid
burn of the same owner.
"""

from __future__ import annotations

import math
from collections import defaultdict, deque
from dataclasses import dataclass
from decimal import Decimal
from typing import Mapping, NamedTuple, Optional, Sequence

from .._decimal import high_precision, to_decimal
from ..amm.tickmath import tick_to_price, tick_to_sqrt_price

LN_TICK_BASE = math.log1p(1e-4)


class Classification(NamedTuple):
    repositioning: frozenset  # (block, log_index) keys of repositioning mints
    skipped: int  # mint/burn events without an owner


def classify_repositioning(events: Sequence, window_seconds: int = 300) -> Classification:
    """Tag mints preceded by a burn of the same owner at most ``window_seconds`` earlier."""
    pending: dict[str, deque] = defaultdict(deque)
    tagged = set()
    skipped = 0
    for ev in sorted(events, key=lambda e: e.sort_key):
        if ev.kind not in ("mint", "burn"):
            continue
        if not ev.owner:
            skipped += 1
            continue
        burns = pending[ev.owner]
        if ev.kind == "burn":
            burns.append(ev.timestamp)
            continue
        while burns and ev.timestamp - burns[0] > window_seconds:
            burns.popleft()
        if burns:
            burns.popleft()
            tagged.add(ev.key)
    return Classification(frozenset(tagged), skipped)


# --------------------------------------------------------------------------
# intensity


@dataclass(frozen=True)
class ValuedMint:
    """A mint with its USD value, repositioning tag and the market price it saw."""

    event: object
    value_usd: float
    repositioning: bool
    market_price: Optional[Decimal] = None


def intensity_value(mints: Sequence[ValuedMint]) -> float:
    """USD share of repositioning mints in the total minted value; 0 if nothing was minted."""
    total = sum(m.value_usd for m in mints)
    if total <= 0:
        return 0.0
    return sum(m.value_usd for m in mints if m.repositioning) / total


def intensity_freq(mints: Sequence[ValuedMint]) -> float:
    """Share of mints, by count, that are repositioning mints."""
    if not mints:
        return 0.0
    return sum(1 for m in mints if m.repositioning) / len(mints)


def intensity_legacy(minted_usd: float, burned_usd: float) -> float:
    """``1 - |M - B| / (M + B)``: 1 when mints and burns balance, 0 for one-sided flow."""
    total = minted_usd + burned_usd
    if total <= 0:
        return 0.0
    return 1.0 - abs(minted_usd - burned_usd) / total


# --------------------------------------------------------------------------
# precision measures


@high_precision
def mid_price(tick_lower: int, tick_upper: int) -> Decimal:
    """Geometric mid ``sqrt(p_lower * p_upper)`` of a tick range."""
    total = tick_lower + tick_upper
    if total % 2 == 0:
        return tick_to_price(total // 2)
    return tick_to_sqrt_price(tick_lower) * tick_to_sqrt_price(tick_upper)


@high_precision
def gap_from_prices(p_mid, p_mkt) -> float:
    return float(abs(to_decimal(p_mid) / to_decimal(p_mkt) - 1))


def gap(mint_event, p_mkt) -> float:
    """``|p_mid / p_mkt - 1|`` with the geometric mid of the position's range."""
    return gap_from_prices(mid_price(mint_event.tick_lower, mint_event.tick_upper), p_mkt)


@high_precision
def length_from_prices(p_lower, p_upper) -> float:
    lo, hi = to_decimal(p_lower), to_decimal(p_upper)
    return float(abs(hi - lo) / (lo * hi).sqrt())


@high_precision
def length(mint_event) -> float:
    """Relative width ``|p_upper - p_lower| / p_mid``."""
    lo = tick_to_price(mint_event.tick_lower)
    hi = tick_to_price(mint_event.tick_upper)
    return float((hi - lo) / mid_price(mint_event.tick_lower, mint_event.tick_upper))


def precision(gap_value: float, length_value: float) -> float:
    """``1 - 1.0001 ** (-1 / (gap * length))`` mapped into [0, 1].

    A zero gap is a perfectly centred position and maps to 1.
    """
    if gap_value < 0 or length_value <= 0:
        raise ValueError("gap must be >= 0 and length > 0")
    product = gap_value * length_value
    if product == 0:
        return 1.0
    if math.isinf(product):
        return 0.0
    return -math.expm1(-LN_TICK_BASE / product)


# --------------------------------------------------------------------------
# filters


class FilterResult(NamedTuple):
    events: list
    dropped: int
    missing_price: int = 0


def _lookup_price(market_prices, ev) -> Optional[Decimal]:
    if hasattr(market_prices, "at"):
        return market_prices.at(ev.timestamp)
    return market_prices.get(ev.key)


def filter_outliers(events: Sequence, market_prices, cutoff: float = 0.20) -> FilterResult:
    """Drop mints and burns whose range mid lies more than ``cutoff`` from the market.

    ``market_prices`` is either a mapping from ``(block, log_index)`` to the
    pool price the event saw, or an object with ``at(timestamp)``. A gap equal
    to the cutoff is kept. Events without a market price are dropped and
    counted separately. Swaps pass through untouched.
    """
    cutoff_d = to_decimal(cutoff)
    kept = []
    dropped = 0
    missing = 0
    for ev in events:
        if ev.kind not in ("mint", "burn"):
            kept.append(ev)
            continue
        p = _lookup_price(market_prices, ev)
        if p is None:
            missing += 1
            continue
        if _exact_gap(ev, p) > cutoff_d:
            dropped += 1
        else:
            kept.append(ev)
    return FilterResult(kept, dropped, missing)


@high_precision
def _exact_gap(ev, p_mkt) -> Decimal:
    return abs(mid_price(ev.tick_lower, ev.tick_upper) / to_decimal(p_mkt) - 1)


def filter_jit(events: Sequence) -> FilterResult:
    """Remove just-in-time liquidity: a mint and a burn by the same owner on the
    same range within the same block. Each mint pairs with at most one burn."""
    open_mints: dict[tuple, deque] = defaultdict(deque)
    removed: set[int] = set()
    for idx, ev in enumerate(events):
        if ev.kind not in ("mint", "burn"):
            continue
        key = (ev.owner, ev.tick_lower, ev.tick_upper, ev.block)
        if ev.kind == "mint":
            open_mints[key].append(idx)
        elif open_mints[key]:
            removed.add(open_mints[key].popleft())
            removed.add(idx)
    kept = [ev for idx, ev in enumerate(events) if idx not in removed]
    return FilterResult(kept, len(removed))


def average(values: Sequence[float], weights: Optional[Sequence[float]] = None) -> Optional[float]:
    """Plain or weighted mean; None for an empty sample or zero total weight."""
    if not values:
        return None
    if weights is None:
        return math.fsum(values) / len(values)
    total = math.fsum(weights)
    if total <= 0:
        return None
    return math.fsum(v * w for v, w in zip(values, weights)) / total
