"""Strategies and property checks shared by the unit and acceptance suites."""

from __future__ import annotations

from decimal import Decimal

from hypothesis import assume
from hypothesis import strategies as st

from clamm._decimal import high_precision
from clamm.amm import (PoolConfig, PoolState, PriceFeed, execute_swap, max_input_buy_x, max_input_sell_x, quote,
                       tick_to_price, tick_to_sqrt_price)
from clamm.exceptions import LiquidityExhausted
from clamm.ingest import PoolEvent, replay
from clamm.metrics import concentration, filter_jit, filter_outliers, precision

FEED = PriceFeed.of(1, 1)


@st.composite
def pools(draw, max_ranges=8, fee_bp=0):
    """Small pools near price 1 with up to ``max_ranges`` initialized ranges."""
    s = draw(st.sampled_from([1, 2, 10]))
    base = draw(st.integers(-50, 50)) * s
    n = draw(st.integers(1, max_ranges))
    liquidity = {}
    for k in range(n):
        L = draw(st.integers(0, 10**9))
        if L:
            liquidity[base + k * s] = Decimal(L)
    assume(liquidity)
    lo, hi = min(liquidity), max(liquidity) + s
    frac = draw(st.fractions(0, 1, max_denominator=10**6))
    t = Decimal(lo) + (hi - lo) * Decimal(frac.numerator) / Decimal(frac.denominator)
    price = Decimal("1.0001") ** t
    cfg = PoolConfig(fee_bp=fee_bp, tick_spacing=s)
    return PoolState(cfg, price, liquidity)


# --------------------------------------------------------------------------
# curve invariant


@high_precision
def check_curve_invariant(state: PoolState, side: str, frac) -> None:
    """A 0-fee swap confined to the market range keeps the range curve intact."""
    tick = state.market_range
    L = state.liquidity_at(tick)
    assume(L > 0)
    x, y = state.range_reserves(tick)
    sa = tick_to_sqrt_price(tick)
    sb = tick_to_sqrt_price(tick + state.config.tick_spacing)
    cap = max_input_sell_x(L, x, y, sa, sb) if side == "sell_x" else max_input_buy_x(L, x, y, sa, sb)
    amount = cap * Decimal(frac)
    assume(amount > 0)
    result = execute_swap(state, side, amount, commit=False)
    assert result.ticks_crossed == 0
    lhs = (x + result.delta_x + L / sb) * (y + result.delta_y + L * sa)
    assert abs(lhs / (L * L) - 1) <= Decimal("1e-9")


# --------------------------------------------------------------------------
# mint/burn round trip


@high_precision
def check_mint_burn_round_trip(state: PoolState, lo_k: int, width_k: int, L: int) -> None:
    s = state.config.tick_spacing
    lo = lo_k * s
    hi = lo + width_k * s
    before = state.to_dict()
    x, y, pid = state.mint("prop", lo, hi, Decimal(L))
    bx, by = state.burn(pid)
    for got, want in ((bx, x), (by, y)):
        assert got == want or abs(got / want - 1) <= Decimal("1e-12")
    after = state.to_dict()
    assert [t for t, _ in after["liquidity"]] == [t for t, _ in before["liquidity"]]
    for (_, a), (_, b) in zip(after["liquidity"], before["liquidity"]):
        assert abs(Decimal(a) / Decimal(b) - 1) <= Decimal("1e-12")
    assert after["market_price"] == before["market_price"]


# --------------------------------------------------------------------------
# concentration and slippage


def check_concentration_monotone(state: PoolState, p1: float, p2: float) -> None:
    lo, hi = sorted((p1, p2))
    c_lo = concentration(state, lo, FEED)
    c_hi = concentration(state, hi, FEED)
    assert 0 <= c_lo <= c_hi + 1e-15
    assert c_hi <= 1 + 1e-15


def check_slippage_monotone(state: PoolState, side: str, f1: float, f2: float) -> None:
    """Sizes are fractions of what the pool can absorb on ``side``."""
    try:
        execute_swap(state, side, Decimal(10) ** 40, commit=False)
        assume(False)
    except LiquidityExhausted as exc:
        capacity = exc.filled_in
    assume(capacity > 0)
    # decimals are 0 and FEED is 1:1, so USD notional equals raw input
    small, large = sorted((f1, f2))
    big = quote(state, capacity * Decimal(repr(large)), side, FEED)
    little = quote(state, capacity * Decimal(repr(small)), side, FEED)
    assert little.slippage_bp <= big.slippage_bp * (1 + Decimal("1e-12")) + Decimal("1e-40")


# --------------------------------------------------------------------------
# precision


def check_precision_bounds_and_order(g1: float, l1: float, g2: float, l2: float) -> None:
    a, b = precision(g1, l1), precision(g2, l2)
    assert 0.0 <= a <= 1.0 and 0.0 <= b <= 1.0
    if g1 * l1 < g2 * l2:
        assert a >= b
        # strict wherever doubles can resolve the difference
        if 0.0 < b and a < 1.0 - 1e-9 and (g2 * l2) / (g1 * l1) > 1 + 1e-6:
            assert a > b


# --------------------------------------------------------------------------
# filters


@st.composite
def lp_event_lists(draw, max_events=24):
    n = draw(st.integers(0, max_events))
    events = []
    ts = 0
    block = 0
    for k in range(n):
        ts += draw(st.integers(0, 400))
        block += draw(st.integers(0, 1))
        kind = draw(st.sampled_from(["mint", "burn", "swap"]))
        if kind == "swap":
            events.append(PoolEvent("swap", ts, block, k, amount_x=Decimal(1), amount_y=Decimal(-1)))
            continue
        lo = draw(st.integers(-5, 5)) * 10
        hi = lo + draw(st.integers(1, 3)) * 10
        owner = draw(st.sampled_from(["a", "b", "c"]))
        events.append(PoolEvent(kind, ts, block, k, owner, lo, hi, Decimal(draw(st.integers(1, 1000)))))
    return events


def check_filter_idempotence(events, cutoff: float) -> None:
    once = filter_jit(events).events
    assert filter_jit(once).events == once
    prices = {ev.key: Decimal(1) for ev in events}
    o1 = filter_outliers(events, prices, cutoff).events
    assert filter_outliers(o1, prices, cutoff).events == o1


# --------------------------------------------------------------------------
# replay determinism


@st.composite
def replay_streams(draw):
    """Valid event streams on a spacing-10 pool at price 1: mints, some swaps, then burns."""
    n_mints = draw(st.integers(1, 5))
    events = []
    ts = block = 0
    minted = []
    for k in range(n_mints):
        lo = draw(st.integers(-6, 5)) * 10
        hi = lo + draw(st.integers(1, 4)) * 10
        L = Decimal(draw(st.integers(10**4, 10**8)))
        owner = f"o{k}"
        ts += draw(st.integers(0, 120))
        block += 1
        events.append(PoolEvent("mint", ts, block, 0, owner, lo, hi, L))
        minted.append((owner, lo, hi, L))
    for _ in range(draw(st.integers(0, 3))):
        ts += draw(st.integers(0, 120))
        block += 1
        amt = Decimal(draw(st.integers(1, 2000)))
        if draw(st.booleans()):
            events.append(PoolEvent("swap", ts, block, 0, amount_x=amt, amount_y=-amt))
        else:
            events.append(PoolEvent("swap", ts, block, 0, amount_x=-amt, amount_y=amt))
    for owner, lo, hi, L in minted:
        if draw(st.booleans()):
            ts += draw(st.integers(0, 120))
            block += 1
            events.append(PoolEvent("burn", ts, block, 0, owner, lo, hi, L))
    return events


def check_replay_determinism(events) -> None:
    cfg = PoolConfig(fee_bp=0, tick_spacing=10)
    a = replay(events, cfg, tick_to_price(0))
    b = replay(events, cfg, tick_to_price(0))
    assert [s.snapshot.to_json() for s in a.steps] == [s.snapshot.to_json() for s in b.steps]
    assert a.final_state.to_json().encode() == b.final_state.to_json().encode()
