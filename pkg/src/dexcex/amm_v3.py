"""Concentrated-liquidity pools (Uniswap v3 style).

A pool is a strictly increasing list of price boundaries with one virtual
liquidity value ``L`` per interval between consecutive boundaries. Inside an
interval the pool behaves like a constant-product pool on virtual reserves
``x = L/sqrt(P)``, ``y = L*sqrt(P)``; a trade that exhausts an interval moves
on to the next one at the boundary price.

Selling X walks the price *down* the grid. Selling Y is handled by inverting
the pool (prices ``1/P``, grid reversed) and walking down that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

from .amm_v2 import PoolStateV2, ba_spread, impermanent_loss_v2
from .costs import CostBreakdown, tc_dex
from .domain import Pair, check_positive, check_price, to_bps, usd_to_token_amount
from .errors import CapacityExceeded, DomainError, InsufficientLiquidityError, OutOfRangeError

FEE_TIERS_BPS = (1, 5, 30, 100)
TICK_BASE = 1.0001
TICK_SPACING = {1: 1, 5: 10, 30: 60, 100: 200}

X_TO_Y = "x_to_y"
Y_TO_X = "y_to_x"


@dataclass(frozen=True)
class TickGrid:
    boundaries: tuple[float, ...]

    def __post_init__(self) -> None:
        b = tuple(float(v) for v in self.boundaries)
        object.__setattr__(self, "boundaries", b)
        if len(b) < 2:
            raise DomainError("a tick grid needs at least two boundaries")
        for v in b:
            check_price(v, "tick boundary")
        if any(hi <= lo for lo, hi in zip(b, b[1:])):
            raise DomainError("tick boundaries must be strictly increasing")

    def __len__(self) -> int:
        return len(self.boundaries) - 1

    def interval(self, index: int) -> tuple[float, float]:
        return self.boundaries[index], self.boundaries[index + 1]

    def inverted(self) -> TickGrid:
        return TickGrid(tuple(1.0 / b for b in reversed(self.boundaries)))


def geometric_grid(center: float, n_below: int, n_above: int, fee_tier_bps: int = 30) -> TickGrid:
    """Grid of boundaries ``1.0001**tick`` on the tier's tick spacing around ``center``.

    Fixture helper only; pools loaded from files carry their own boundaries.
    """
    check_price(center, "center")
    spacing = TICK_SPACING[fee_tier_bps]
    tick = math.floor(math.log(center, TICK_BASE) / spacing) * spacing
    ticks = range(tick - n_below * spacing, tick + (n_above + 1) * spacing, spacing)
    return TickGrid(tuple(TICK_BASE**t for t in ticks))


@dataclass(frozen=True)
class PoolStateV3:
    pair: Pair
    fee_tier_bps: int
    grid: TickGrid
    liquidity: tuple[float, ...]
    current_price: float
    pool_id: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "liquidity", tuple(float(v) for v in self.liquidity))
        if self.fee_tier_bps not in FEE_TIERS_BPS:
            raise DomainError(f"fee tier {self.fee_tier_bps} bps not in {FEE_TIERS_BPS}")
        if len(self.liquidity) != len(self.grid):
            raise DomainError(
                f"{len(self.liquidity)} liquidity values for {len(self.grid)} intervals"
            )
        if any(not (v >= 0 and math.isfinite(v)) for v in self.liquidity):
            raise DomainError("liquidity must be non-negative and finite")
        p = check_price(self.current_price, "current price")
        lo, hi = self.grid.boundaries[0], self.grid.boundaries[-1]
        if not lo <= p <= hi:
            raise OutOfRangeError(f"current price {p} outside tick span [{lo}, {hi}]")

    @property
    def fee(self) -> float:
        return self.fee_tier_bps / 1e4

    def current_interval(self) -> int:
        """Index of the interval holding the price; a price on a boundary belongs to the lower one."""
        b = self.grid.boundaries
        for i in range(len(b) - 1):
            if self.current_price <= b[i + 1]:
                return i
        return len(b) - 2

    def inverted(self) -> PoolStateV3:
        return replace(
            self,
            pair=self.pair.inverted(),
            grid=self.grid.inverted(),
            liquidity=tuple(reversed(self.liquidity)),
            current_price=1.0 / self.current_price,
        )


@dataclass(frozen=True)
class LiquidityPosition:
    lower: float
    upper: float
    real_x: float
    real_y: float
    share: float = 1.0

    def __post_init__(self) -> None:
        check_price(self.lower, "lower price")
        if not self.upper > self.lower:
            raise DomainError("position needs lower < upper")
        if self.real_x < 0 or self.real_y < 0:
            raise DomainError("real reserves must be non-negative")
        if not 0.0 <= self.share <= 1.0:
            raise DomainError("share must lie in [0, 1]")


@dataclass(frozen=True)
class Fill:
    interval_index: int
    amount_in: float
    amount_out: float
    local_price: float


@dataclass(frozen=True)
class SwapResultV3:
    """Outcome of a swap. ``fills`` sum to ``net_in`` (input after fees) and ``amount_out``."""

    amount_in: float
    net_in: float
    amount_out: float
    initial_price: float
    final_price: float
    final_interval: int
    fills: tuple[Fill, ...]
    crossed_empty: tuple[int, ...] = field(default=())

    @property
    def transaction_price(self) -> float:
        return self.amount_out / self.net_in


def _check_range(price: float, lower: float, upper: float) -> None:
    if not lower <= price <= upper:
        raise OutOfRangeError(f"price {price} outside [{lower}, {upper}]")


def liquidity_of(position: LiquidityPosition, current_price: float) -> float:
    p = check_price(current_price)
    _check_range(p, position.lower, position.upper)
    s, sa, sb = math.sqrt(p), math.sqrt(position.lower), math.sqrt(position.upper)
    candidates = []
    if p < position.upper:
        candidates.append(position.real_x / (1.0 / s - 1.0 / sb))
    if p > position.lower:
        candidates.append(position.real_y / (s - sa))
    return min(candidates)


def virtual_reserves(position: LiquidityPosition, current_price: float) -> tuple[float, float, float]:
    """Virtual ``(x, y, L)`` of a position at ``current_price``.

    ``L`` is taken from the real reserves (the binding leg if they are not in
    exact proportion); then ``x = x~ + L/sqrt(Pb)`` and ``y = y~ + L*sqrt(Pa)``.
    """
    L = liquidity_of(position, current_price)
    x = position.real_x + L / math.sqrt(position.upper)
    y = position.real_y + L * math.sqrt(position.lower)
    return x, y, L


def real_reserves(L: float, current_price: float, lower: float, upper: float) -> tuple[float, float]:
    """Inverse of :func:`virtual_reserves`: real ``(x~, y~)`` held by liquidity ``L`` on ``[lower, upper]``."""
    p = check_price(current_price)
    _check_range(p, lower, upper)
    s = math.sqrt(p)
    return L * (1.0 / s - 1.0 / math.sqrt(upper)), L * (s - math.sqrt(lower))


def swap_within_interval(
    L: float, price: float, dx: float, lower: float | None = None
) -> tuple[float, float]:
    """Sell ``dx`` of X against liquidity ``L`` starting at ``price``.

    Returns ``(dy, new_price)`` with ``1/sqrt(P') = 1/sqrt(P) + dx/L``. If
    ``lower`` is given and the trade would push the price below it,
    :class:`CapacityExceeded` is raised carrying the input consumed at the boundary.
    """
    price = check_price(price)
    if not L > 0:
        raise DomainError("liquidity must be positive")
    if dx < 0:
        raise DomainError("dx must be non-negative")
    s = math.sqrt(price)
    if lower is not None:
        sl = math.sqrt(lower)
        capacity = L * (1.0 / sl - 1.0 / s)
        if dx > capacity:
            raise CapacityExceeded(capacity, L * (s - sl))
    s_new = s * L / (L + dx * s)
    # dy = L(s - s_new) written without the cancellation
    return dx * s * s_new, s_new * s_new


def execute_swap_v3(
    pool: PoolStateV3, dx: float, apply_fee: bool = True, direction: str = X_TO_Y
) -> SwapResultV3:
    """Sell ``dx`` of the input token, crossing intervals as needed."""
    dx = check_positive(dx, "dx")
    if direction == Y_TO_X:
        pool = pool.inverted()
    elif direction != X_TO_Y:
        raise DomainError(f"unknown direction {direction!r}")

    phi = 1.0 - pool.fee if apply_fee else 1.0
    net = phi * dx
    b = pool.grid.boundaries
    i = pool.current_interval()
    s = math.sqrt(pool.current_price)
    remaining = net
    fills: list[Fill] = []
    skipped: list[int] = []

    while remaining > 0:
        if i < 0:
            raise InsufficientLiquidityError(
                f"pool exhausted after {(net - remaining) / phi!r} of {dx!r} input",
                max_input=(net - remaining) / phi,
            )
        L = pool.liquidity[i]
        sl = math.sqrt(b[i])
        if L == 0.0:
            if s > sl:
                skipped.append(i)
            s = sl
            i -= 1
            continue
        capacity = L * (1.0 / sl - 1.0 / s)
        if remaining < capacity:
            s_new = s * L / (L + remaining * s)
            dy = remaining * s * s_new
            fills.append(Fill(i, remaining, dy, dy / remaining))
            s = s_new
            remaining = 0.0
            # a price that ends within rounding of the lower boundary sits on it
            if s <= sl * (1.0 + 1e-13):
                s = sl
                i -= 1
            break
        if capacity > 0:
            dy = L * (s - sl)
            fills.append(Fill(i, capacity, dy, dy / capacity))
        remaining -= capacity
        s = sl
        i -= 1

    return SwapResultV3(
        amount_in=dx,
        net_in=net,
        amount_out=sum(f.amount_out for f in fills),
        initial_price=pool.current_price,
        final_price=s * s,
        final_interval=max(i, 0),
        fills=tuple(fills),
        crossed_empty=tuple(skipped),
    )


def max_input(pool: PoolStateV3, apply_fee: bool = True, direction: str = X_TO_Y) -> float:
    """Largest input the pool can absorb before running off the grid."""
    if direction == Y_TO_X:
        pool = pool.inverted()
    b = pool.grid.boundaries
    i = pool.current_interval()
    s = math.sqrt(pool.current_price)
    total = 0.0
    while i >= 0:
        sl = math.sqrt(b[i])
        if pool.liquidity[i] > 0:
            total += pool.liquidity[i] * (1.0 / sl - 1.0 / s)
        s = sl
        i -= 1
    return total / (1.0 - pool.fee if apply_fee else 1.0)


def half_spread_v3(
    pool: PoolStateV3, dx: float, apply_fee: bool = True, direction: str = X_TO_Y
) -> float:
    """``(P - T)/P`` in bps, ``T`` being output per unit of post-fee input."""
    res = execute_swap_v3(pool, dx, apply_fee=apply_fee, direction=direction)
    return to_bps((res.initial_price - res.transaction_price) / res.initial_price)


def ba_spread_v3(pool: PoolStateV3, usd_size: float, usd_price_x: float, usd_price_y: float) -> float:
    dx = usd_to_token_amount(usd_price_x, usd_size)
    dy = usd_to_token_amount(usd_price_y, usd_size)
    return 0.5 * (half_spread_v3(pool, dx) + half_spread_v3(pool, dy, direction=Y_TO_X))


@dataclass(frozen=True)
class ImpermanentLossV3:
    delta_p: float
    leverage: float
    il_v2: float
    value: float


def leverage_factor(price: float, lower: float) -> float:
    s = math.sqrt(check_price(price))
    return s / (s - math.sqrt(lower))


def impermanent_loss_v3(delta_p: float, price: float, lower: float) -> ImpermanentLossV3:
    """IL of a position on ``[lower, price**2/lower]`` (centred on ``price`` geometrically).

    Only valid while the new price ``delta_p * price`` stays inside the range.
    """
    delta_p = check_positive(delta_p, "delta_p")
    price = check_price(price)
    lower = check_price(lower, "lower bound")
    if not lower < price:
        raise DomainError("lower bound must be below the current price")
    upper = price * price / lower
    new_price = delta_p * price
    if not lower <= new_price <= upper:
        raise OutOfRangeError(f"final price {new_price} leaves the range [{lower}, {upper}]")
    lam = leverage_factor(price, lower)
    il2 = impermanent_loss_v2(delta_p).value
    return ImpermanentLossV3(delta_p, lam, il2, lam * il2)


def _pool_label(pool: PoolStateV2 | PoolStateV3, index: int) -> str:
    return pool.pool_id or f"pool{index}"


def best_pool(
    pools: Sequence[PoolStateV2 | PoolStateV3],
    usd_size: float,
    gas_cost_usd: float,
    usd_price_x: float | None = None,
    usd_price_y: float = 1.0,
    gas_cost_usd_v2: float | None = None,
) -> tuple[str, CostBreakdown]:
    """Cheapest single pool for a trade of ``usd_size`` dollars.

    Cost is the two-way average spread plus the pool fee plus gas. Without
    ``usd_price_x`` each pool converts dollars to X at its own pre-trade quoted
    price. Ties go to the lower fee, then the lower id. Pools too shallow for
    the size are skipped.
    """
    if not pools:
        raise DomainError("no candidate pools")
    if gas_cost_usd_v2 is None:
        gas_cost_usd_v2 = gas_cost_usd

    best: tuple[float, float, str] | None = None
    best_cost: CostBreakdown | None = None
    deepest = 0.0
    for n, pool in enumerate(pools):
        label = _pool_label(pool, n)
        px = usd_price_x
        if px is None:
            quote = pool.current_price if isinstance(pool, PoolStateV3) else pool.y / pool.x
            px = quote * usd_price_y
        if isinstance(pool, PoolStateV3):
            try:
                spread = ba_spread_v3(pool, usd_size, px, usd_price_y)
            except InsufficientLiquidityError:
                depth_usd = min(
                    max_input(pool) * px, max_input(pool, direction=Y_TO_X) * usd_price_y
                )
                deepest = max(deepest, depth_usd)
                continue
            fee, gas = float(pool.fee_tier_bps), gas_cost_usd
        else:
            spread = ba_spread(pool, usd_size, px, usd_price_y)
            fee, gas = pool.fee_bps, gas_cost_usd_v2
        cost = tc_dex(spread, fee, gas, usd_size, venue=label)
        key = (cost.total, fee, label)
        if best is None or key < best:
            best, best_cost = key, cost
    if best is None or best_cost is None:
        raise InsufficientLiquidityError(
            f"no pool can absorb {usd_size} USD (deepest takes {deepest} USD)", max_input=deepest
        )
    return best[2], best_cost
