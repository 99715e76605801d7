import json
from decimal import Decimal, localcontext

import pytest

from clamm._decimal import CONTEXT
from clamm.amm import PoolState, PriceFeed, tick_to_price, tvl
from clamm.exceptions import EventParseError, ReplayError
from clamm.ingest import (EVENT_COLUMNS, PoolEvent, SeriesPriceFeed, bucketize, parse_events,
                          parse_price_series, replay, serialize_events)

from pools import ETH, MARKET_TICK, USDC, USDC_ETH

HEADER = ",".join(EVENT_COLUMNS) + "\n"


def _mint(ts, block, owner="a", lo=0, hi=60, L="1000"):
    return PoolEvent("mint", ts, block, 0, owner, lo, hi, Decimal(L))


def test_empty_file():
    assert parse_events(b"") == ([], [])
    assert parse_events(HEADER) == ([], [])


def test_misaligned_row_rejected_with_line():
    text = HEADER + "mint,1,1,0,a,0,60,5,,\nmint,2,2,0,a,7,60,5,,\n"
    events, diags = parse_events(text, tick_spacing=60)
    assert len(events) == 1
    assert diags[0].line == 3
    assert "aligned" in diags[0].message


@pytest.mark.parametrize("row,needle", [
    ("mint,x,1,0,a,0,60,5,,", "integer"),
    ("mint,1,1,0,,0,60,5,,", "owner"),
    ("mint,1,1,0,a,60,0,5,,", "below"),
    ("mint,1,1,0,a,0,60,-5,,", "positive"),
    ("mint,1,1,0,a,0,60,5,1,", "empty"),
    ("swap,1,1,0,,,,,5,5", "exactly one"),
    ("swap,1,1,0,,,,,5,", "missing"),
    ("trade,1,1,0,,,,,5,-5", "kind"),
    ("mint,1,1,0,a,0,60", "fields"),
])
def test_row_diagnostics(row, needle):
    events, diags = parse_events(HEADER + row + "\n")
    assert events == []
    assert any(needle in d.message for d in diags)


def test_wrong_header_is_file_error():
    with pytest.raises(EventParseError, match="unknown columns: extra"):
        parse_events(HEADER.strip() + ",extra\n")
    with pytest.raises(EventParseError):
        parse_events(b"\xff\xfe")


def test_output_sorted_and_duplicates_reported():
    text = HEADER + "mint,5,2,0,a,0,60,1,,\nmint,1,1,0,a,0,60,1,,\nmint,6,2,0,b,0,60,1,,\n"
    events, diags = parse_events(text)
    assert [e.timestamp for e in events] == [1, 5]
    assert "duplicate" in diags[0].message


def test_csv_round_trip(data_dir):
    events, _ = parse_events((data_dir / "hour_events.csv").read_bytes())
    text = serialize_events(events)
    assert parse_events(text).events == events
    assert serialize_events(parse_events(text).events) == text


def test_jsonl_round_trip_and_unknown_field(data_dir):
    events, _ = parse_events((data_dir / "hour_events.csv").read_bytes())
    text = serialize_events(events, "jsonl")
    assert parse_events(text, "jsonl").events == events
    bad = json.dumps({"kind": "mint", "timestamp": 1, "block": 1, "log_index": 0, "colour": "red"})
    _, diags = parse_events(bad, "jsonl")
    assert "colour" in diags[0].message


def test_eth_pool_mints_replay_into_distribution(data_dir):
    events, diags = parse_events((data_dir / "eth_pool_mints.csv").read_bytes(), tick_spacing=60)
    assert not diags
    result = replay(events, USDC_ETH, tick_to_price(MARKET_TICK))
    ranges = {r.tick_lower: r for r in result.final_state.ranges()}
    assert abs(ranges[200580].liquidity / Decimal("2.771e18") - 1) <= Decimal("0.001")
    assert abs(ranges[200580].y / ETH - Decimal("119.42")) <= Decimal("0.01")
    # mints only: TVL equals the value of everything deposited
    feed = PriceFeed.of(1, "1939.56")
    with localcontext(CONTEXT):
        deposited = (sum(s.amount_x for s in result) / USDC
                     + sum(s.amount_y for s in result) / ETH * Decimal("1939.56"))
        assert abs(tvl(result.final_state, feed) / deposited - 1) < Decimal("1e-40")


def test_swap_event_drains_market_range(data_dir):
    events, _ = parse_events((data_dir / "eth_pool_mints.csv").read_bytes())
    swap = PoolEvent("swap", 2000, 200, 0, amount_x=200_000 * USDC, amount_y=Decimal("-102946600000000000000"))
    result = replay(events + [swap], USDC_ETH, tick_to_price(MARKET_TICK))
    y = result.final_state.range_reserves(200580)[1]
    assert abs(y / ETH - Decimal("16.48")) <= Decimal("0.01")
    assert result.reconciliation_warnings == 0


def test_reconciliation_warning_on_divergent_log(data_dir):
    events, _ = parse_events((data_dir / "eth_pool_mints.csv").read_bytes())
    swap = PoolEvent("swap", 2000, 200, 0, amount_x=200_000 * USDC, amount_y=Decimal(-90 * ETH))
    result = replay(events + [swap], USDC_ETH, tick_to_price(MARKET_TICK))
    assert result.reconciliation_warnings == 1


def test_out_of_order_fails_before_mutation():
    genesis = PoolState(USDC_ETH, tick_to_price(0))
    before = genesis.to_json()
    with pytest.raises(ReplayError):
        replay([_mint(5, 2), _mint(1, 1)], genesis=genesis)
    assert genesis.to_json() == before


def test_over_burn_carries_event_context():
    burn = PoolEvent("burn", 2, 2, 0, "a", 0, 60, Decimal(2000))
    with pytest.raises(ReplayError, match="block=2") as info:
        replay([_mint(1, 1), burn], USDC_ETH, Decimal(1))
    assert info.value.event == burn


def test_replay_needs_a_start():
    with pytest.raises(ReplayError):
        replay([_mint(1, 1)])


def test_bucket_examples():
    steps = replay([_mint(0, 1), _mint(300, 2), _mint(1200, 3)], USDC_ETH, Decimal(1)).steps
    buckets = bucketize(steps[:1], 300)
    assert (buckets[0].start_ts, buckets[0].end_ts, len(buckets[0].steps)) == (0, 300, 1)
    buckets = bucketize(steps, 300)
    assert [len(b.steps) for b in buckets] == [1, 1, 0, 0, 1]
    # the empty intervals share the snapshot left by the second event
    assert buckets[1].end_snapshot is buckets[2].end_snapshot is buckets[3].end_snapshot
    assert sum(len(b.events) for b in buckets) == len(steps)


def test_bucket_bounds_checked():
    steps = replay([_mint(10, 1)], USDC_ETH, Decimal(1)).steps
    with pytest.raises(ValueError):
        bucketize(steps, 300, start=20, end=600)
    with pytest.raises(ValueError):
        bucketize(steps, 0)


def test_price_series_step_lookup():
    series = parse_price_series("timestamp,price\n100,1800\n50,1700\n")
    assert series.at(49) is None
    assert series.at(50) == 1700
    assert series.at(100) == 1800
    feed = SeriesPriceFeed(series, "y", 1)
    assert feed.at(120) == PriceFeed.of(1, 1800)


@pytest.mark.parametrize("text", ["time,price\n1,2\n", "timestamp,price\n1,2\n1,3\n", "timestamp,price\n1,-2\n"])
def test_price_series_rejects_bad_input(text):
    with pytest.raises(EventParseError):
        parse_price_series(text)
