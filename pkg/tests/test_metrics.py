import itertools
import math
import random
from decimal import Decimal

import mpmath
import pytest

from clamm.amm import PoolConfig, PoolState, PriceFeed, tick_to_price
from clamm.ingest import PoolEvent
from clamm.metrics import (EXHAUSTED, NO_PRICE, ValuedMint, average, classify_repositioning, concentration,
                           filter_jit, filter_outliers, gap, gap_from_prices, gas_fee_usd, intensity_freq,
                           intensity_legacy, intensity_value, length, length_from_prices, precision,
                           slippage_grid, turnover)

from oracles import hand_gap, hand_length, hand_precision
from pools import MARKET_TICK, USDC_ETH

_block = itertools.count(1)


def ev(kind, ts, owner="a", lo=-60, hi=60, block=None):
    return PoolEvent(kind, ts, next(_block) if block is None else block, 0, owner, lo, hi, Decimal(1))


def tagged_times(events, window=300):
    keys = classify_repositioning(events, window).repositioning
    return [e.timestamp for e in events if e.key in keys]


# --- repositioning classification --------------------------------------------

def test_window_edges():
    assert tagged_times([ev("burn", 0), ev("mint", 299)]) == [299]
    assert tagged_times([ev("burn", 0), ev("mint", 300)]) == [300]
    assert tagged_times([ev("burn", 0), ev("mint", 301)]) == []


def test_one_burn_one_mint():
    assert tagged_times([ev("burn", 0), ev("mint", 10), ev("mint", 20)]) == [10]


def test_other_owner_and_one_minute_window():
    assert tagged_times([ev("burn", 0, "a"), ev("mint", 10, "b")]) == []
    assert tagged_times([ev("burn", 0), ev("mint", 61)], window=60) == []
    assert tagged_times([ev("burn", 0), ev("mint", 60)], window=60) == [60]


def test_owner_missing_is_skipped_and_counted():
    events = [PoolEvent("burn", 0, 1, 0, None, 0, 60, Decimal(1)), ev("mint", 5)]
    result = classify_repositioning(events)
    assert result.skipped == 1
    assert not result.repositioning


def _max_matching(burns, mints, window):
    for k in range(min(len(burns), len(mints)), 0, -1):
        for perm in itertools.permutations(range(len(burns)), k):
            for chosen in itertools.combinations(range(len(mints)), k):
                if all(0 <= mints[m] - burns[b] <= window for b, m in zip(perm, chosen)):
                    return k
    return 0


@pytest.mark.parametrize("seed", range(40))
def test_matching_is_maximal_on_small_cases(seed):
    # exhaustive check: greedy earliest-first pairing finds a maximum matching
    rng = random.Random(seed)
    kinds = [rng.choice("bm") for _ in range(6)]
    times = sorted(rng.sample(range(0, 900, 50), 6))
    events = [ev("burn" if k == "b" else "mint", t) for k, t in zip(kinds, times)]
    burns = [t for k, t in zip(kinds, times) if k == "b"]
    mints = [t for k, t in zip(kinds, times) if k == "m"]
    tagged = tagged_times(events)
    assert len(tagged) == _max_matching(burns, mints, 300)


# --- intensities ---------------------------------------------------------------

def _vm(value, tagged):
    return ValuedMint(None, value, tagged)


def test_intensity_value_examples():
    assert intensity_value([]) == 0
    assert intensity_value([_vm(100, False), _vm(300, False)]) == 0
    assert intensity_value([_vm(100, True), _vm(300, True)]) == 1
    assert intensity_value([_vm(100, False), _vm(300, True)]) == 0.75


def test_intensity_freq_examples():
    assert intensity_freq([]) == 0
    assert intensity_freq([_vm(1, True)] + [_vm(1, False)] * 3) == 0.25
    assert intensity_freq([_vm(1, True)] * 2) == 1


def test_intensity_legacy_examples():
    assert intensity_legacy(5, 5) == 1
    assert intensity_legacy(5, 0) == 0
    assert intensity_legacy(3, 1) == 0.5
    assert intensity_legacy(0, 0) == 0


# --- gap / length / precision -----------------------------------------------------

def test_gap_examples():
    assert gap(ev("mint", 0, lo=-600, hi=600), Decimal(1)) == 0
    assert gap_from_prices("0.98", 1) == pytest.approx(0.02, rel=1e-15)
    assert gap_from_prices("1.0186", 1) == pytest.approx(0.0186, rel=1e-15)


def test_gap_matches_oracle_for_odd_tick_sum():
    p = tick_to_price(MARKET_TICK)
    got = gap(ev("mint", 0, lo=200520, hi=200700 + 1), p)
    assert got == pytest.approx(float(hand_gap(200520, 200701, mpmath.mpf(str(p)))), rel=1e-14)


def test_length_examples():
    assert length_from_prices(1800, 2000) == pytest.approx(200 / math.sqrt(3.6e6), rel=1e-15)
    assert length_from_prices(1800, 2000) == pytest.approx(0.1054, abs=5e-5)
    for s in (1, 10, 60):
        assert length(ev("mint", 0, lo=0, hi=s)) == pytest.approx(1e-4 * s, rel=1e-3)
    assert length(ev("mint", 0, lo=200520, hi=200640)) == pytest.approx(float(hand_length(200520, 200640)),
                                                                          rel=1e-14)


def test_precision_examples():
    assert precision(0.02, 0.18) == pytest.approx(0.0274, abs=5e-5)
    assert precision(0.02, 0.18) == pytest.approx(float(hand_precision(0.02, 0.18)), rel=1e-12)
    assert precision(0, 0.5) == 1
    assert precision(1e300, 1e300) == 0
    assert precision(1e6, 1e6) < 1e-15
    with pytest.raises(ValueError):
        precision(-0.1, 1)
    with pytest.raises(ValueError):
        precision(0.1, 0)


def test_average():
    assert average([]) is None
    assert average([1, 2, 3]) == 2
    assert average([1, 3], [3, 1]) == 1.5
    assert average([1], [0]) is None


# --- filters ----------------------------------------------------------------------

def test_outlier_cutoff_examples():
    centred = ev("mint", 0, lo=-600, hi=600)  # geometric mid exactly 1
    prices = {centred.key: None}
    assert filter_outliers([centred], {centred.key: Decimal("0.8")}).dropped == 1
    assert filter_outliers([centred], {centred.key: 1 / Decimal("1.19")}).dropped == 0
    # |1 / 1.25 - 1| is exactly 0.2: kept
    assert filter_outliers([centred], {centred.key: Decimal("1.25")}).dropped == 0
    assert filter_outliers([centred], {centred.key: Decimal("1.25")}, cutoff=0.1999).dropped == 1
    res = filter_outliers([centred], prices)
    assert (res.events, res.dropped, res.missing_price) == ([], 0, 1)


def test_outlier_filter_passes_swaps():
    swap = PoolEvent("swap", 0, 1, 0, amount_x=Decimal(1), amount_y=Decimal(-1))
    assert filter_outliers([swap], {}).events == [swap]


def test_jit_examples():
    mint = ev("mint", 0, block=7)
    burn = ev("burn", 0, block=7)
    assert filter_jit([mint, burn]) == ([], 2, 0)
    other = ev("burn", 0, owner="b", block=7)
    assert filter_jit([mint, other]).dropped == 0
    later = ev("burn", 12, block=8)
    assert filter_jit([mint, later]).dropped == 0
    wider = ev("burn", 0, lo=-120, block=7)
    assert filter_jit([mint, wider]).dropped == 0


# --- costs -------------------------------------------------------------------------

def test_gas_fee_examples():
    assert gas_fee_usd(0, 1800) == 0
    assert gas_fee_usd(64.8, 1800) == pytest.approx(14.00, abs=0.01)
    assert gas_fee_usd(1, 1000) == pytest.approx(0.12, rel=1e-12)
    with pytest.raises(ValueError):
        gas_fee_usd(-1, 1000)


def test_turnover_examples():
    assert turnover(7, 7) == 1
    assert turnover(5, 0) is None
    assert turnover(513.73, 201.19) == pytest.approx(2.554, abs=1e-3)


# --- concentration and slippage grid ------------------------------------------------------

def test_concentration_full_when_band_covers_everything():
    state = PoolState(PoolConfig(fee_bp=0, tick_spacing=2), Decimal(1))
    state.mint("a", -198, 198, Decimal(10**9))
    feed = PriceFeed.of(1, 1)
    assert concentration(state, tick_to_price(198) - 1, feed) == pytest.approx(1, rel=1e-15)
    assert concentration(state, 0.01, feed) < 1


def test_concentration_of_empty_pool_is_zero():
    assert concentration(PoolState.at_tick(USDC_ETH, MARKET_TICK), 0.02, PriceFeed.of(1, 1)) == 0


def test_concentration_eth_pool_ordering(eth_pool):
    feed = PriceFeed.of(1, "1939.56")
    values = [concentration(eth_pool, p, feed) for p in (0.01, 0.02, 0.10)]
    assert values == sorted(values)
    assert values[-1] == pytest.approx(1, rel=1e-15)


def test_slippage_grid_deep_pool():
    cfg = PoolConfig(fee_bp=0, tick_spacing=10)
    state = PoolState(cfg, Decimal(1), {t: Decimal(10**12) for t in range(-2000, 2000, 10)})
    grid = slippage_grid(state, price_feed=PriceFeed.of(1, 1))
    assert grid.get(100, "sell_x") < 1
    for side in ("buy_x", "sell_x"):
        row = [grid.get(s, side) for s in (100, 500, 1000, 5000, 10000, 50000, 100000)]
        assert row == sorted(row)
    assert not grid.reasons


def test_slippage_grid_absent_cells():
    empty = PoolState.at_tick(USDC_ETH, MARKET_TICK)
    grid = slippage_grid(empty, price_feed=PriceFeed.of(1, 1))
    assert all(v is None for v in grid.values.values())
    assert set(grid.reasons.values()) == {EXHAUSTED}
    grid = slippage_grid(empty, sizes_usd=[100])
    assert grid.reasons == {(100, "buy_x"): NO_PRICE, (100, "sell_x"): NO_PRICE}
