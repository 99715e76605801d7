"""Stylized adverse-selection experiment for liquidity providers.

Each LP policy gets its own pool holding only that LP's position. The LP
starts with ``capital_usd`` split evenly between X (the risky token, priced
in Y) and Y (a USD stablecoin). The external price then jumps permanently to
``shock_price`` and an arbitrageur trades the pool to it at zero fee. A
repositioning LP with ``update_latency == 0`` pulls liquidity before the
arbitrage and re-mints around the new price after it; with positive latency
the arbitrage hits the stale position first.

P&L is reported against buy-and-hold of the initial tokens and also as the
absolute change in portfolio value.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from decimal import Decimal
from typing import Optional, Sequence

from ._decimal import ZERO, high_precision, to_decimal
from .amm.state import PoolConfig, PoolState
from .amm.swap import swap_to_price
from .amm.tickmath import (MAX_TICK, MIN_TICK, liquidity_from_token_x, liquidity_from_token_y, position_amounts,
                           price_to_tick, tick_to_price)
from .exceptions import ValidationError

SCENARIO_TICK_SPACING = 10
LP_OWNER = "lp"


@dataclass(frozen=True)
class LPPolicy:
    """One liquidity provider's strategy.

    The range is ``[p0 / (1 + range_width), p0 * (1 + range_width)]`` around the
    initial price, widened outward to the tick grid, unless explicit
    ``lower``/``upper`` human prices are given.
    """

    name: str
    range_width: float = 0.1
    repositions: bool = False
    update_latency: float = 0.0
    gas_cost_usd: float = 0.0
    lower: Optional[float] = None
    upper: Optional[float] = None

    def __post_init__(self):
        if not self.name:
            raise ValidationError("policy needs a name")
        if not self.range_width > 0:
            raise ValidationError(f"policy {self.name!r}: range_width must be positive")
        if self.update_latency < 0 or self.gas_cost_usd < 0:
            raise ValidationError(f"policy {self.name!r}: latency and gas cost must be nonnegative")
        if (self.lower is None) != (self.upper is None):
            raise ValidationError(f"policy {self.name!r}: give both lower and upper or neither")
        if self.lower is not None and not 0 < self.lower < self.upper:
            raise ValidationError(f"policy {self.name!r}: need 0 < lower < upper")


@dataclass(frozen=True)
class ScenarioSpec:
    initial_price: float
    shock_price: float
    lp_policies: tuple
    capital_usd: float = 1_000_000.0
    fee_bp: int = 0

    def __post_init__(self):
        if not (self.initial_price > 0 and self.shock_price > 0):
            raise ValidationError("prices must be positive")
        if self.capital_usd <= 0:
            raise ValidationError("capital_usd must be positive")
        if not self.lp_policies:
            raise ValidationError("at least one LP policy is required")
        names = [p.name for p in self.lp_policies]
        if len(set(names)) != len(names):
            raise ValidationError("policy names must be unique")
        object.__setattr__(self, "lp_policies", tuple(self.lp_policies))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lp_policies"] = [asdict(p) for p in self.lp_policies]
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioSpec":
        if not isinstance(data, dict):
            raise ValidationError("scenario spec must be a JSON object")
        known = {"initial_price", "shock_price", "lp_policies", "capital_usd", "fee_bp"}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown scenario field(s): {', '.join(sorted(unknown))}")
        policies = data.get("lp_policies")
        if not isinstance(policies, list):
            raise ValidationError("lp_policies must be a list")
        try:
            parsed = tuple(LPPolicy(**p) for p in policies)
            kwargs = {k: data[k] for k in known - {"lp_policies"} if k in data}
            return cls(lp_policies=parsed, **kwargs)
        except TypeError as exc:
            raise ValidationError(f"malformed scenario spec: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "ScenarioSpec":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"scenario spec is not valid JSON: {exc}") from exc
        return cls.from_dict(data)


@dataclass
class LPResult:
    name: str
    pnl_vs_hold_usd: float
    pnl_abs_usd: float
    fees_earned_usd: float
    gas_spent_usd: float
    hold_value_usd: float
    final_value_usd: float
    initial_value_usd: float
    updates: int
    lower: float
    upper: float
    extra: dict = field(default_factory=dict)


RESULT_COLUMNS = ("name", "pnl_vs_hold_usd", "pnl_abs_usd", "fees_earned_usd", "gas_spent_usd",
                  "hold_value_usd", "final_value_usd", "initial_value_usd", "updates", "lower", "upper")


def _range_ticks(center, width=None, lower=None, upper=None) -> tuple[int, int]:
    s = SCENARIO_TICK_SPACING
    if lower is None:
        c = to_decimal(center)
        factor = 1 + to_decimal(width)
        lower, upper = c / factor, c * factor
    lo = price_to_tick(to_decimal(lower)) // s * s
    hi_tick = price_to_tick(to_decimal(upper))
    if tick_to_price(hi_tick) < to_decimal(upper):
        hi_tick += 1
    hi = -(-hi_tick // s) * s
    lo = max(lo, -(-MIN_TICK // s) * s)
    hi = min(hi, MAX_TICK // s * s)
    if hi <= lo:
        hi = lo + s
    return lo, hi


def _max_liquidity(state: PoolState, lo: int, hi: int, x_avail: Decimal, y_avail: Decimal) -> Decimal:
    """Largest L the LP can fund on [lo, hi) at the pool's current price."""
    p = state.market_price
    candidates = []
    if p < tick_to_price(hi) and x_avail > 0:
        candidates.append(liquidity_from_token_x(x_avail, lo, hi, p))
    if p > tick_to_price(lo) and y_avail > 0:
        candidates.append(liquidity_from_token_y(y_avail, lo, hi, p))
    if not candidates:
        return ZERO
    return min(candidates)


def _mint_max(state: PoolState, lo: int, hi: int, x: Decimal, y: Decimal) -> tuple[Decimal, Decimal, Optional[str]]:
    L = _max_liquidity(state, lo, hi, x, y)
    if L <= 0:
        return x, y, None
    # shave a hair off so rounding never asks for more than the LP holds
    L = L * (1 - Decimal("1e-30"))
    used_x, used_y, pid = state.mint(LP_OWNER, lo, hi, L)
    return x - used_x, y - used_y, pid


@high_precision
def _run_policy(spec: ScenarioSpec, policy: LPPolicy) -> LPResult:
    p0 = to_decimal(spec.initial_price)
    p1 = to_decimal(spec.shock_price)
    capital = to_decimal(spec.capital_usd)
    cfg = PoolConfig("X", "Y", 0, 0, spec.fee_bp, SCENARIO_TICK_SPACING)
    state = PoolState(cfg, p0)

    lo, hi = _range_ticks(p0, policy.range_width, policy.lower, policy.upper)
    if not tick_to_price(lo) <= p0 <= tick_to_price(hi):
        raise ValidationError(f"policy {policy.name!r}: range excludes the initial price")

    hold_x = capital / 2 / p0
    hold_y = capital / 2
    x_idle, y_idle, pid = _mint_max(state, lo, hi, hold_x, hold_y)
    moved = p1 != p0
    reposition = policy.repositions and moved
    early = reposition and policy.update_latency == 0
    updates = 0

    if early and pid is not None:
        bx, by = state.burn(pid)
        x_idle, y_idle, pid = x_idle + bx, y_idle + by, None
    swap_to_price(state, p1, charge_fee=True)
    if reposition:
        if pid is not None:
            bx, by = state.burn(pid)
            x_idle, y_idle = x_idle + bx, y_idle + by
        lo, hi = _range_ticks(p1, policy.range_width)
        if policy.lower is not None:
            scale = p1 / p0
            lo, hi = _range_ticks(p1, lower=to_decimal(policy.lower) * scale, upper=to_decimal(policy.upper) * scale)
        x_idle, y_idle, pid = _mint_max(state, lo, hi, x_idle, y_idle)
        updates = 1

    pos_x = pos_y = ZERO
    for pos in state.positions.values():
        px, py = position_amounts(pos, state.market_price)
        pos_x += px
        pos_y += py
    final_x = pos_x + x_idle
    final_y = pos_y + y_idle
    fees = state.fees_x * p1 + state.fees_y
    gas = to_decimal(policy.gas_cost_usd) * updates
    final_value = final_x * p1 + final_y + fees - gas
    hold_value = hold_x * p1 + hold_y
    initial_value = hold_x * p0 + hold_y
    return LPResult(
        name=policy.name,
        pnl_vs_hold_usd=float(final_value - hold_value),
        pnl_abs_usd=float(final_value - initial_value),
        fees_earned_usd=float(fees),
        gas_spent_usd=float(gas),
        hold_value_usd=float(hold_value),
        final_value_usd=float(final_value),
        initial_value_usd=float(initial_value),
        updates=updates,
        lower=float(tick_to_price(lo)),
        upper=float(tick_to_price(hi)),
        extra={"final_x": float(final_x), "final_y": float(final_y)},
    )


def run_scenario(spec: ScenarioSpec) -> list[LPResult]:
    """Run every policy of ``spec`` and return one result per LP, in spec order."""
    return [_run_policy(spec, policy) for policy in spec.lp_policies]


def results_to_json(results: Sequence[LPResult]) -> str:
    return json.dumps([{k: getattr(r, k) for k in RESULT_COLUMNS} for r in results], indent=2) + "\n"


def results_to_csv(results: Sequence[LPResult]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RESULT_COLUMNS)
    for r in results:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in (getattr(r, k) for k in RESULT_COLUMNS)])
    return buf.getvalue()


def reference_spec(gas_cost_usd: float = 0.0) -> ScenarioSpec:
    """Reference parameterization: price 1000 -> 2000, $1M per LP.

    The wide range ``[510, 1960]`` gives a passive loss near $300K; the narrow
    range (±1%) loses close to $500K; the early repositioner avoids the loss.
    """
    return ScenarioSpec(
        initial_price=1000.0,
        shock_price=2000.0,
        capital_usd=1_000_000.0,
        lp_policies=(
            LPPolicy("narrow_passive", range_width=0.01),
            LPPolicy("wide_passive", range_width=0.96, lower=510.0, upper=1960.0),
            LPPolicy("repositioner", range_width=0.01, repositions=True, gas_cost_usd=gas_cost_usd),
        ),
    )
