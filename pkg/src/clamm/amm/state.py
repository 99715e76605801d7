"""Pool configuration, positions and the tick-indexed liquidity state."""

from __future__ import annotations

import bisect
import json
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Iterator, NamedTuple, Optional

from .._decimal import CONTEXT, ZERO, canonical, high_precision, to_decimal
from ..exceptions import DomainError, PositionNotFound, ValidationError
from .tickmath import (
    MAX_TICK,
    MIN_TICK,
    align_down,
    amounts_for_liquidity,
    human_price,
    price_to_tick,
    tick_to_price,
    tick_to_sqrt_price,
)

FEE_TIERS_BP = (0, 1, 5, 30, 100)


@dataclass(frozen=True)
class PoolConfig:
    token_x_symbol: str = "X"
    token_y_symbol: str = "Y"
    decimals_x: int = 0
    decimals_y: int = 0
    fee_bp: int = 30
    tick_spacing: int = 60

    def __post_init__(self):
        if not isinstance(self.tick_spacing, int) or self.tick_spacing < 1:
            raise ValidationError(f"tick_spacing must be a positive integer, got {self.tick_spacing!r}")
        if self.fee_bp not in FEE_TIERS_BP:
            raise ValidationError(f"fee_bp must be one of {FEE_TIERS_BP}, got {self.fee_bp!r}")
        for name in ("decimals_x", "decimals_y"):
            value = getattr(self, name)
            if not isinstance(value, int) or not 0 <= value <= 36:
                raise ValidationError(f"{name} must be an integer in [0, 36], got {value!r}")

    def human_price(self, raw) -> Decimal:
        return human_price(raw, self.decimals_x, self.decimals_y)

    def to_dict(self) -> dict:
        return {
            "token_x_symbol": self.token_x_symbol,
            "token_y_symbol": self.token_y_symbol,
            "decimals_x": self.decimals_x,
            "decimals_y": self.decimals_y,
            "fee_bp": self.fee_bp,
            "tick_spacing": self.tick_spacing,
        }


@dataclass(frozen=True)
class LiquidityPosition:
    id: str
    owner: str
    tick_lower: int
    tick_upper: int
    liquidity: Decimal

    def __post_init__(self):
        if self.tick_lower >= self.tick_upper:
            raise ValidationError(f"tick_lower {self.tick_lower} must be below tick_upper {self.tick_upper}")
        if self.liquidity < 0:
            raise ValidationError("position liquidity must be nonnegative")


class TickRangeLiquidity(NamedTuple):
    """One elementary range ``[tick_lower, tick_lower + s)`` with its reserves."""

    tick_lower: int
    liquidity: Decimal
    x: Decimal
    y: Decimal


class PriceFeed(NamedTuple):
    """USD prices of one whole (human-unit) token X and token Y."""

    usd_x: Decimal
    usd_y: Decimal

    @classmethod
    def of(cls, usd_x, usd_y) -> "PriceFeed":
        return cls(to_decimal(usd_x), to_decimal(usd_y))


class PoolState:
    """Mutable concentrated-liquidity pool.

    Liquidity is stored per elementary tick range (``L_i`` keyed by the range's
    lower tick). Reserves are never stored; they are recomputed from ``L_i``
    and the continuous market price, so they cannot drift out of sync.

    Mutations (mint, burn, swaps) must be serialized by the caller. Use
    :meth:`snapshot` to obtain a frozen copy that is safe to share.
    """

    def __init__(self, config: PoolConfig, market_price, liquidity: Optional[dict] = None,
                 positions: Optional[dict] = None) -> None:
        price = to_decimal(market_price)
        if price <= 0:
            raise DomainError("market price must be positive")
        price_to_tick(price)  # bounds check
        self.config = config
        self._price = CONTEXT.plus(price)
        self._liquidity: dict[int, Decimal] = {}
        self._positions: dict[str, LiquidityPosition] = dict(positions or {})
        self._sorted_ticks: Optional[list[int]] = None
        self._frozen = False
        self._next_id = 0
        self.fees_x = ZERO
        self.fees_y = ZERO
        for tick, L in (liquidity or {}).items():
            tick = int(tick)
            L = to_decimal(L)
            if tick % config.tick_spacing:
                raise ValidationError(f"range lower tick {tick} not aligned to spacing {config.tick_spacing}")
            if L < 0:
                raise ValidationError("range liquidity must be nonnegative")
            if L > 0:
                self._liquidity[tick] = L

    @classmethod
    def at_tick(cls, config: PoolConfig, tick: int, **kwargs) -> "PoolState":
        return cls(config, tick_to_price(tick), **kwargs)

    # ------------------------------------------------------------------ views
    @property
    def market_price(self) -> Decimal:
        return self._price

    @property
    def market_price_adj(self) -> Decimal:
        return self.config.human_price(self._price)

    @property
    def market_tick(self) -> int:
        return price_to_tick(self._price)

    @property
    def market_range(self) -> int:
        """Lower tick of the elementary range containing the market price (half-open)."""
        return align_down(self.market_tick, self.config.tick_spacing)

    @property
    def positions(self) -> dict[str, LiquidityPosition]:
        return dict(self._positions)

    @property
    def frozen(self) -> bool:
        return self._frozen

    def liquidity_at(self, tick_lower: int) -> Decimal:
        return self._liquidity.get(tick_lower, ZERO)

    def initialized_ticks(self) -> list[int]:
        """Sorted lower ticks of ranges with nonzero liquidity."""
        if self._sorted_ticks is None:
            self._sorted_ticks = sorted(self._liquidity)
        return self._sorted_ticks

    def next_initialized_below(self, tick_lower: int) -> Optional[int]:
        ticks = self.initialized_ticks()
        k = bisect.bisect_left(ticks, tick_lower)
        return ticks[k - 1] if k > 0 else None

    def next_initialized_above(self, tick_lower: int) -> Optional[int]:
        ticks = self.initialized_ticks()
        k = bisect.bisect_right(ticks, tick_lower)
        return ticks[k] if k < len(ticks) else None

    @high_precision
    def range_reserves(self, tick_lower: int, price=None) -> tuple[Decimal, Decimal]:
        L = self._liquidity.get(tick_lower, ZERO)
        if L == 0:
            return ZERO, ZERO
        p = self._price if price is None else to_decimal(price)
        return amounts_for_liquidity(
            L,
            tick_to_sqrt_price(tick_lower),
            tick_to_sqrt_price(tick_lower + self.config.tick_spacing),
            p.sqrt(),
        )

    def ranges(self) -> list[TickRangeLiquidity]:
        """Liquidity distribution by elementary range, ascending."""
        out = []
        for tick in self.initialized_ticks():
            x, y = self.range_reserves(tick)
            out.append(TickRangeLiquidity(tick, self._liquidity[tick], x, y))
        return out

    def __iter__(self) -> Iterator[TickRangeLiquidity]:
        return iter(self.ranges())

    @high_precision
    def total_reserves(self) -> tuple[Decimal, Decimal]:
        x_total = ZERO
        y_total = ZERO
        for r in self.ranges():
            x_total += r.x
            y_total += r.y
        return x_total, y_total

    # -------------------------------------------------------------- mutations
    def _check_mutable(self):
        if self._frozen:
            raise TypeError("pool snapshot is read-only")

    def _check_range(self, tick_lower: int, tick_upper: int):
        s = self.config.tick_spacing
        if tick_lower % s or tick_upper % s:
            raise ValidationError(f"ticks [{tick_lower}, {tick_upper}] not aligned to spacing {s}")
        if tick_lower >= tick_upper:
            raise ValidationError(f"tick_lower {tick_lower} must be below tick_upper {tick_upper}")
        if tick_lower < MIN_TICK or tick_upper > MAX_TICK:
            raise ValidationError("tick range outside admissible bounds")

    def _add_liquidity(self, tick_lower: int, tick_upper: int, delta: Decimal):
        s = self.config.tick_spacing
        with_ctx = CONTEXT
        for tick in range(tick_lower, tick_upper, s):
            value = with_ctx.add(self._liquidity.get(tick, ZERO), delta)
            if value < 0:
                raise DomainError(f"range {tick} liquidity would become negative")
            if value == 0:
                self._liquidity.pop(tick, None)
            else:
                self._liquidity[tick] = value
        self._sorted_ticks = None

    def _new_id(self) -> str:
        while True:
            self._next_id += 1
            pid = f"pos-{self._next_id}"
            if pid not in self._positions:
                return pid

    @high_precision
    def mint(self, owner: str, tick_lower: int, tick_upper: int, liquidity,
             position_id: Optional[str] = None) -> tuple[Decimal, Decimal, str]:
        """Add ``liquidity`` on ``[tick_lower, tick_upper]``.

        Returns the token amounts the LP must deposit and the position id. If
        ``position_id`` names an existing position on the same range, its
        liquidity is increased instead of opening a new position.
        """
        self._check_mutable()
        self._check_range(tick_lower, tick_upper)
        L = to_decimal(liquidity)
        if L <= 0:
            raise ValidationError("minted liquidity must be positive")
        if position_id is not None and position_id in self._positions:
            old = self._positions[position_id]
            if (old.owner, old.tick_lower, old.tick_upper) != (owner, tick_lower, tick_upper):
                raise ValidationError(f"position {position_id} exists with a different owner or range")
            pos = LiquidityPosition(position_id, owner, tick_lower, tick_upper, old.liquidity + L)
        else:
            pid = position_id if position_id is not None else self._new_id()
            pos = LiquidityPosition(pid, owner, tick_lower, tick_upper, L)
        self._add_liquidity(tick_lower, tick_upper, L)
        self._positions[pos.id] = pos
        x, y = amounts_for_liquidity(L, tick_to_sqrt_price(tick_lower), tick_to_sqrt_price(tick_upper),
                                     self._price.sqrt())
        return x, y, pos.id

    @high_precision
    def burn(self, position_id: str, liquidity=None) -> tuple[Decimal, Decimal]:
        """Withdraw a position (or ``liquidity`` of it) at the current market price."""
        self._check_mutable()
        if position_id not in self._positions:
            raise PositionNotFound(position_id)
        pos = self._positions[position_id]
        L = pos.liquidity if liquidity is None else to_decimal(liquidity)
        if L <= 0:
            raise ValidationError("burned liquidity must be positive")
        if L > pos.liquidity:
            raise DomainError(f"burn of {L} exceeds position liquidity {pos.liquidity}")
        self._add_liquidity(pos.tick_lower, pos.tick_upper, -L)
        remaining = pos.liquidity - L
        if remaining == 0:
            del self._positions[position_id]
        else:
            self._positions[position_id] = LiquidityPosition(pos.id, pos.owner, pos.tick_lower,
                                                              pos.tick_upper, remaining)
        return amounts_for_liquidity(L, tick_to_sqrt_price(pos.tick_lower), tick_to_sqrt_price(pos.tick_upper),
                                     self._price.sqrt())

    def _set_price(self, price: Decimal):
        self._check_mutable()
        self._price = CONTEXT.plus(price)

    # --------------------------------------------------------------- trading
    def swap_sell_x(self, delta_x_in):
        from .swap import execute_swap

        return execute_swap(self, "sell_x", delta_x_in, commit=True)

    def swap_buy_x(self, delta_y_in):
        from .swap import execute_swap

        return execute_swap(self, "buy_x", delta_y_in, commit=True)

    def quote(self, notional_usd, side: str, price_feed: PriceFeed):
        from .swap import quote

        return quote(self, notional_usd, side, price_feed)

    def depth_within(self, pct, price_feed: PriceFeed) -> Decimal:
        from .depth import depth_within

        return depth_within(self, pct, price_feed)

    def tvl(self, price_feed: PriceFeed) -> Decimal:
        from .depth import tvl

        return tvl(self, price_feed)

    # ------------------------------------------------------------ snapshots
    def copy(self) -> "PoolState":
        new = PoolState.__new__(PoolState)
        new.config = self.config
        new._price = self._price
        new._liquidity = dict(self._liquidity)
        new._positions = dict(self._positions)
        new._sorted_ticks = self._sorted_ticks
        new._frozen = False
        new._next_id = self._next_id
        new.fees_x = self.fees_x
        new.fees_y = self.fees_y
        return new

    def snapshot(self) -> "PoolState":
        """Read-only copy; mutating it raises ``TypeError``."""
        snap = self.copy()
        snap._frozen = True
        return snap

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "market_price": canonical(self._price),
            "liquidity": [[tick, canonical(self._liquidity[tick])] for tick in self.initialized_ticks()],
            "positions": [
                {
                    "id": p.id,
                    "owner": p.owner,
                    "tick_lower": p.tick_lower,
                    "tick_upper": p.tick_upper,
                    "liquidity": canonical(p.liquidity),
                }
                for p in sorted(self._positions.values(), key=lambda p: p.id)
            ],
            "fees_x": canonical(self.fees_x),
            "fees_y": canonical(self.fees_y),
        }

    def to_json(self) -> str:
        """Canonical JSON: byte-identical for identical states."""
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> "PoolState":
        try:
            config = PoolConfig(**data["config"])
            liquidity = {int(t): to_decimal(L) for t, L in data.get("liquidity", [])}
            state = cls(config, to_decimal(data["market_price"]), liquidity)
            for p in data.get("positions", []):
                pos = LiquidityPosition(str(p["id"]), str(p["owner"]), int(p["tick_lower"]),
                                        int(p["tick_upper"]), to_decimal(p["liquidity"]))
                state._positions[pos.id] = pos
            state.fees_x = to_decimal(data.get("fees_x", 0))
            state.fees_y = to_decimal(data.get("fees_y", 0))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, (ValidationError, DomainError)):
                raise
            raise ValidationError(f"malformed pool snapshot: {exc}") from exc
        return state

    @classmethod
    def from_json(cls, text: str) -> "PoolState":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"snapshot is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ValidationError("snapshot must be a JSON object")
        return cls.from_dict(data)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PoolState):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __repr__(self) -> str:
        return (f"PoolState({self.config.token_x_symbol}/{self.config.token_y_symbol}, "
                f"tick={self.market_tick}, ranges={len(self._liquidity)}, positions={len(self._positions)})")
