"""Event-log ingestion: parsing, replay through the pool engine, interval bucketing.

Event files are CSV with the exact header::

    kind,timestamp,block,log_index,owner,tick_lower,tick_upper,liquidity,amount_x,amount_y

or JSON lines with the same field names. Inapplicable fields are empty
(CSV) or null/absent (JSON). Swap amounts are signed raw token units from
the pool's point of view: the input token is positive, the output negative.
"""

from __future__ import annotations

import bisect
import csv
import io
import json
import logging
from dataclasses import dataclass, field
from decimal import Decimal
from typing import IO, Iterable, NamedTuple, Optional, Sequence, Union

from ._decimal import ZERO, canonical, high_precision, to_decimal
from .amm.state import PoolConfig, PoolState
from .amm.swap import execute_swap, swap_to_price
from .amm.tickmath import amounts_for_liquidity, tick_to_sqrt_price
from .exceptions import ClammError, EventParseError, LiquidityExhausted, ReplayError

log = logging.getLogger(__name__)

EVENT_COLUMNS = ("kind", "timestamp", "block", "log_index", "owner", "tick_lower",
                 "tick_upper", "liquidity", "amount_x", "amount_y")
KINDS = ("swap", "mint", "burn")
RECONCILIATION_TOLERANCE = Decimal("0.001")


@dataclass(frozen=True)
class PoolEvent:
    kind: str
    timestamp: int
    block: int
    log_index: int
    owner: Optional[str] = None
    tick_lower: Optional[int] = None
    tick_upper: Optional[int] = None
    liquidity: Optional[Decimal] = None
    amount_x: Optional[Decimal] = None
    amount_y: Optional[Decimal] = None

    @property
    def key(self) -> tuple[int, int]:
        return (self.block, self.log_index)

    @property
    def sort_key(self) -> tuple[int, int, int]:
        return (self.timestamp, self.block, self.log_index)

    def to_row(self) -> dict:
        def num(v):
            if v is None:
                return None
            return canonical(v) if isinstance(v, Decimal) else str(v)

        return {
            "kind": self.kind,
            "timestamp": str(self.timestamp),
            "block": str(self.block),
            "log_index": str(self.log_index),
            "owner": self.owner,
            "tick_lower": num(self.tick_lower),
            "tick_upper": num(self.tick_upper),
            "liquidity": num(self.liquidity),
            "amount_x": num(self.amount_x),
            "amount_y": num(self.amount_y),
        }


class Diagnostic(NamedTuple):
    line: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line}: {self.message}"


class ParseResult(NamedTuple):
    events: list
    diagnostics: list


# --------------------------------------------------------------------------
# parsing


def _int_field(row, name, diag):
    raw = row.get(name)
    if raw is None or raw == "":
        diag.append(f"missing required field {name!r}")
        return None
    if isinstance(raw, bool):
        diag.append(f"{name!r} must be an integer, got {raw!r}")
        return None
    if isinstance(raw, int):
        return raw
    try:
        return int(str(raw).strip())
    except ValueError:
        diag.append(f"{name!r} must be an integer, got {raw!r}")
        return None


def _dec_field(row, name, diag):
    raw = row.get(name)
    if raw is None or raw == "":
        diag.append(f"missing required field {name!r}")
        return None
    if isinstance(raw, (bool, float)):
        diag.append(f"{name!r} must be a decimal string or integer, got {raw!r}")
        return None
    try:
        value = to_decimal(raw if isinstance(raw, int) else str(raw))
    except (ValueError, TypeError):
        diag.append(f"{name!r} must be a decimal number, got {raw!r}")
        return None
    if not value.is_finite():
        diag.append(f"{name!r} must be finite")
        return None
    return value


def _row_to_event(row: dict, tick_spacing: Optional[int]) -> tuple[Optional[PoolEvent], list[str]]:
    diag: list[str] = []
    kind = row.get("kind")
    if kind not in KINDS:
        return None, [f"unknown kind {kind!r}"]
    ts = _int_field(row, "timestamp", diag)
    block = _int_field(row, "block", diag)
    log_index = _int_field(row, "log_index", diag)
    if ts is not None and ts < 0:
        diag.append("timestamp must be nonnegative")
    owner = row.get("owner")
    owner = None if owner in (None, "") else str(owner)
    values = {}
    if kind in ("mint", "burn"):
        if owner is None:
            diag.append(f"{kind} requires an owner")
        lo = _int_field(row, "tick_lower", diag)
        hi = _int_field(row, "tick_upper", diag)
        L = _dec_field(row, "liquidity", diag)
        if lo is not None and hi is not None and lo >= hi:
            diag.append(f"tick_lower {lo} must be below tick_upper {hi}")
        if tick_spacing and lo is not None and hi is not None and (lo % tick_spacing or hi % tick_spacing):
            diag.append(f"ticks [{lo}, {hi}] not aligned to spacing {tick_spacing}")
        if L is not None and L <= 0:
            diag.append("liquidity must be positive")
        for name in ("amount_x", "amount_y"):
            if row.get(name) not in (None, ""):
                diag.append(f"{name!r} must be empty for {kind}")
        values = dict(tick_lower=lo, tick_upper=hi, liquidity=L)
    else:
        ax = _dec_field(row, "amount_x", diag)
        ay = _dec_field(row, "amount_y", diag)
        if ax is not None and ay is not None and not ((ax > 0 and ay <= 0) or (ay > 0 and ax <= 0)):
            diag.append("swap must have exactly one positive (input) amount and one nonpositive (output) amount")
        for name in ("tick_lower", "tick_upper", "liquidity"):
            if row.get(name) not in (None, ""):
                diag.append(f"{name!r} must be empty for swap")
        values = dict(amount_x=ax, amount_y=ay)
    if diag:
        return None, diag
    return PoolEvent(kind, ts, block, log_index, owner, **values), []


def _canonicalize(events: list[PoolEvent], lines: list[int], diagnostics: list[Diagnostic]) -> list[PoolEvent]:
    order = sorted(range(len(events)), key=lambda k: events[k].sort_key)
    out: list[PoolEvent] = []
    seen: dict[tuple[int, int], int] = {}
    last_key = None
    for k in order:
        ev = events[k]
        if ev.key in seen:
            diagnostics.append(Diagnostic(lines[k], f"duplicate (block, log_index) {ev.key}, first seen on line {seen[ev.key]}"))
            continue
        if last_key is not None and ev.key < last_key:
            diagnostics.append(Diagnostic(lines[k], f"(block, log_index) {ev.key} goes backwards relative to timestamp order"))
            continue
        seen[ev.key] = lines[k]
        last_key = ev.key
        out.append(ev)
    diagnostics.sort()
    return out


def _read_text(source) -> str:
    if isinstance(source, bytes):
        data = source
    elif isinstance(source, str):
        return source
    else:
        data = source.read()
        if isinstance(data, str):
            return data
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise EventParseError(f"input is not valid UTF-8: {exc}") from exc


def parse_events(source: Union[bytes, str, IO], format: str = "csv",
                 tick_spacing: Optional[int] = None) -> ParseResult:
    """Parse an event file into canonically sorted events plus row diagnostics.

    Rows that fail validation are rejected and reported with their line
    number; nothing is dropped silently.

    Raises:
        EventParseError: undecodable input, wrong CSV header or unknown format.
    """
    text = _read_text(source)
    events: list[PoolEvent] = []
    lines: list[int] = []
    diagnostics: list[Diagnostic] = []
    if format == "csv":
        if not text.strip():
            return ParseResult([], [])
        reader = csv.reader(io.StringIO(text))
        try:
            header = next(reader)
        except csv.Error as exc:
            raise EventParseError(f"unreadable CSV header: {exc}") from exc
        if tuple(h.strip() for h in header) != EVENT_COLUMNS:
            unknown = sorted(set(h.strip() for h in header) - set(EVENT_COLUMNS))
            detail = f" (unknown columns: {', '.join(unknown)})" if unknown else ""
            raise EventParseError(f"CSV header must be exactly {','.join(EVENT_COLUMNS)}{detail}")
        try:
            for row in reader:
                line = reader.line_num
                if not row or all(not c.strip() for c in row):
                    continue
                if len(row) != len(EVENT_COLUMNS):
                    diagnostics.append(Diagnostic(line, f"expected {len(EVENT_COLUMNS)} fields, got {len(row)}"))
                    continue
                record = {k: v.strip() for k, v in zip(EVENT_COLUMNS, row)}
                ev, problems = _row_to_event(record, tick_spacing)
                if ev is None:
                    diagnostics.extend(Diagnostic(line, p) for p in problems)
                else:
                    events.append(ev)
                    lines.append(line)
        except csv.Error as exc:
            raise EventParseError(f"malformed CSV: {exc}") from exc
    elif format == "jsonl":
        for line, raw in enumerate(text.splitlines(), start=1):
            if not raw.strip():
                continue
            try:
                record = json.loads(raw)
            except json.JSONDecodeError as exc:
                diagnostics.append(Diagnostic(line, f"invalid JSON: {exc.msg}"))
                continue
            if not isinstance(record, dict):
                diagnostics.append(Diagnostic(line, "each line must be a JSON object"))
                continue
            unknown = sorted(set(record) - set(EVENT_COLUMNS))
            if unknown:
                diagnostics.append(Diagnostic(line, f"unknown field(s): {', '.join(unknown)}"))
                continue
            ev, problems = _row_to_event(record, tick_spacing)
            if ev is None:
                diagnostics.extend(Diagnostic(line, p) for p in problems)
            else:
                events.append(ev)
                lines.append(line)
    else:
        raise EventParseError(f"unknown event format {format!r} (expected csv or jsonl)")
    return ParseResult(_canonicalize(events, lines, diagnostics), diagnostics)


def serialize_events(events: Iterable[PoolEvent], format: str = "csv") -> str:
    """Inverse of :func:`parse_events` for canonical event lists."""
    rows = [ev.to_row() for ev in events]
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(EVENT_COLUMNS)
        for row in rows:
            writer.writerow(["" if row[c] is None else row[c] for c in EVENT_COLUMNS])
        return buf.getvalue()
    if format == "jsonl":
        return "".join(json.dumps({k: v for k, v in row.items() if v is not None}, sort_keys=True) + "\n"
                       for row in rows)
    raise EventParseError(f"unknown event format {format!r}")


# --------------------------------------------------------------------------
# price series


class PriceSeries:
    """Step function of (timestamp, USD price) observations."""

    def __init__(self, points: Sequence[tuple[int, Decimal]]):
        ts = [int(t) for t, _ in points]
        prices = [to_decimal(p) for _, p in points]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise EventParseError("price series timestamps must be strictly increasing")
        if any(p <= 0 for p in prices):
            raise EventParseError("price series values must be positive")
        self.timestamps = ts
        self.prices = prices

    def __len__(self) -> int:
        return len(self.timestamps)

    def at(self, timestamp) -> Optional[Decimal]:
        """Latest observation at or before ``timestamp``; None before the first."""
        k = bisect.bisect_right(self.timestamps, timestamp)
        return self.prices[k - 1] if k else None


def parse_price_series(source: Union[bytes, str, IO]) -> PriceSeries:
    """Parse a ``timestamp,price`` CSV (header required)."""
    text = _read_text(source)
    reader = csv.reader(io.StringIO(text))
    rows = [r for r in reader if r and any(c.strip() for c in r)]
    if not rows:
        return PriceSeries([])
    if [c.strip() for c in rows[0]] != ["timestamp", "price"]:
        raise EventParseError("price series header must be exactly timestamp,price")
    points = []
    for n, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise EventParseError(f"price series line {n}: expected 2 fields")
        try:
            points.append((int(row[0]), to_decimal(row[1])))
        except (ValueError, TypeError) as exc:
            raise EventParseError(f"price series line {n}: {exc}") from exc
    points.sort(key=lambda p: p[0])
    return PriceSeries(points)


class SeriesPriceFeed:
    """Time-varying USD prices from a series for one token and a fixed price for the other."""

    def __init__(self, series: PriceSeries, token: str = "y", other_usd=1):
        if token not in ("x", "y"):
            raise ValueError("token must be 'x' or 'y'")
        self.series = series
        self.token = token
        self.other_usd = to_decimal(other_usd)

    def at(self, timestamp):
        from .amm.state import PriceFeed

        p = self.series.at(timestamp)
        if p is None:
            return None
        return PriceFeed(p, self.other_usd) if self.token == "x" else PriceFeed(self.other_usd, p)


class StaticPriceFeed:
    """Constant USD prices, for snapshots and tests."""

    def __init__(self, usd_x, usd_y):
        from .amm.state import PriceFeed

        self.feed = PriceFeed.of(usd_x, usd_y)

    def at(self, timestamp):
        return self.feed


# --------------------------------------------------------------------------
# replay


class ReplayStep(NamedTuple):
    """One applied event with the pool state after it.

    ``price_before`` is the market price the event saw; ``amount_x`` and
    ``amount_y`` are the token flows into the pool (negative when leaving).
    """

    event: PoolEvent
    snapshot: PoolState
    price_before: Decimal
    amount_x: Decimal
    amount_y: Decimal


@dataclass
class ReplayResult:
    steps: list
    final_state: PoolState
    reconciliation_warnings: int = 0
    warnings: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.steps)

    def __len__(self):
        return len(self.steps)


def position_key(event: PoolEvent) -> str:
    return f"{event.owner}:{event.tick_lower}:{event.tick_upper}"


def check_sorted(events: Sequence[PoolEvent]) -> None:
    """Raise ``ReplayError`` unless events are in canonical order."""
    for prev, ev in zip(events, events[1:]):
        if ev.sort_key <= prev.sort_key or ev.key <= prev.key:
            raise ReplayError("events are not in canonical (timestamp, block, log_index) order", ev)


@high_precision
def _apply_swap(state: PoolState, ev: PoolEvent, warnings: list) -> tuple[Decimal, Decimal, bool]:
    if ev.amount_x > 0:
        side, amount_in, logged_out = "sell_x", ev.amount_x, -ev.amount_y
    else:
        side, amount_in, logged_out = "buy_x", ev.amount_y, -ev.amount_x
    try:
        result = execute_swap(state, side, amount_in, commit=True)
        engine_out = -(result.delta_y if side == "sell_x" else result.delta_x)
    except LiquidityExhausted as exc:
        # the chain executed it, so move the price as far as our liquidity allows
        engine_out = exc.filled_out
        edge = state.initialized_ticks()
        if edge:
            from .amm.tickmath import tick_to_price

            s = state.config.tick_spacing
            target = tick_to_price(edge[0]) if side == "sell_x" else tick_to_price(edge[-1] + s)
            swap_to_price(state, target)
        warnings.append(f"swap at block {ev.block} log {ev.log_index} exhausted engine liquidity")
    mismatch = False
    if logged_out > 0:
        mismatch = abs(engine_out / logged_out - 1) > RECONCILIATION_TOLERANCE
    elif engine_out != 0:
        mismatch = True
    if mismatch:
        warnings.append(f"swap at block {ev.block} log {ev.log_index}: engine output {engine_out} "
                        f"vs logged {logged_out}")
    return ev.amount_x, ev.amount_y, mismatch


@high_precision
def apply_event(state: PoolState, ev: PoolEvent, warnings: Optional[list] = None) -> tuple[Decimal, Decimal, bool]:
    """Apply one event in place and return ``(amount_x, amount_y, reconciliation_mismatch)``."""
    warnings = [] if warnings is None else warnings
    if ev.kind == "mint":
        x, y, _ = state.mint(ev.owner, ev.tick_lower, ev.tick_upper, ev.liquidity, position_id=position_key(ev))
        return x, y, False
    if ev.kind == "burn":
        pid = position_key(ev)
        if pid not in state._positions:
            raise ReplayError(f"burn of unknown position {pid}", ev)
        available = state._positions[pid].liquidity
        if ev.liquidity > available:
            raise ReplayError(f"burn of {ev.liquidity} exceeds available position liquidity {available}", ev)
        x, y = state.burn(pid, ev.liquidity)
        return -x, -y, False
    return _apply_swap(state, ev, warnings)


def replay(events: Sequence[PoolEvent], config: Optional[PoolConfig] = None, initial_price=None,
           genesis: Optional[PoolState] = None) -> ReplayResult:
    """Apply events in order, snapshotting the pool after each one.

    Start either from ``genesis`` (a pool snapshot) or from an empty pool with
    ``config`` at ``initial_price``. Swap outputs are reconciled against the
    logged amounts; divergences above 0.1% are counted as warnings.

    Raises:
        ReplayError: unsorted input (before any mutation) or an inapplicable burn.
    """
    events = list(events)
    check_sorted(events)
    if genesis is not None:
        state = genesis.copy()
    else:
        if config is None or initial_price is None:
            raise ReplayError("replay needs either a genesis snapshot or config plus initial_price")
        state = PoolState(config, initial_price)
    steps: list[ReplayStep] = []
    warnings: list[str] = []
    mismatches = 0
    for ev in events:
        price_before = state.market_price
        try:
            ax, ay, mismatch = apply_event(state, ev, warnings)
        except ReplayError:
            raise
        except ClammError as exc:
            raise ReplayError(str(exc), ev) from exc
        mismatches += mismatch
        steps.append(ReplayStep(ev, state.snapshot(), price_before, ax, ay))
    for w in warnings:
        log.warning(w)
    return ReplayResult(steps, state, mismatches, warnings)


# --------------------------------------------------------------------------
# bucketing


@dataclass
class IntervalBucket:
    start_ts: int
    end_ts: int
    steps: list
    end_snapshot: PoolState

    def _of(self, kind):
        return [s.event for s in self.steps if s.event.kind == kind]

    @property
    def events(self) -> list:
        return [s.event for s in self.steps]

    @property
    def mints(self) -> list:
        return self._of("mint")

    @property
    def burns(self) -> list:
        return self._of("burn")

    @property
    def swaps(self) -> list:
        return self._of("swap")


def bucketize(steps: Sequence[ReplayStep], interval_seconds: int = 300, start: Optional[int] = None,
              end: Optional[int] = None, initial_snapshot: Optional[PoolState] = None) -> list[IntervalBucket]:
    """Group replayed events into half-open ``[start, start + interval)`` buckets.

    ``start`` defaults to the first event's timestamp rounded down to the
    interval; ``end`` to just past the last event. Empty intervals carry the
    previous snapshot forward.
    """
    if interval_seconds <= 0:
        raise ValueError("interval_seconds must be positive")
    steps = list(steps)
    if not steps and (start is None or end is None):
        return []
    if start is None:
        start = steps[0].event.timestamp // interval_seconds * interval_seconds
    if end is None:
        end = steps[-1].event.timestamp + 1
    if end <= start:
        return []
    if steps and steps[0].event.timestamp < start:
        raise ValueError("events before the bucket start")
    if steps and steps[-1].event.timestamp >= end:
        raise ValueError("events at or after the bucket end")
    snapshot = initial_snapshot
    buckets = []
    k = 0
    t = start
    while t < end:
        t_end = t + interval_seconds
        chunk = []
        while k < len(steps) and steps[k].event.timestamp < t_end:
            chunk.append(steps[k])
            k += 1
        if chunk:
            snapshot = chunk[-1].snapshot
        if snapshot is None:
            raise ValueError("first bucket has no events and no initial snapshot was given")
        buckets.append(IntervalBucket(t, t_end, chunk, snapshot))
        t = t_end
    return buckets
