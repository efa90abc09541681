"""Constant-product pool math (Uniswap v2 style).

Fees are charged on the input leg: only ``phi * dx`` (``phi = 1 - fee``) enters
the ``x * y = k`` invariant. Collected fees are kept in a separate accumulator
and never compound into the reserves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .domain import Pair, check_positive, check_price, to_bps, usd_to_token_amount
from .errors import DomainError


@dataclass(frozen=True)
class PoolStateV2:
    pair: Pair
    x: float
    y: float
    fee: float = 0.003
    fees_x: float = 0.0
    fees_y: float = 0.0
    pool_id: str = ""

    def __post_init__(self) -> None:
        check_positive(self.x, "reserve x")
        check_positive(self.y, "reserve y")
        if not (0.0 <= self.fee < 1.0):
            raise DomainError(f"fee must lie in [0, 1), got {self.fee!r}")

    @property
    def phi(self) -> float:
        return 1.0 - self.fee

    @property
    def fee_bps(self) -> float:
        return to_bps(self.fee)

    @property
    def k(self) -> float:
        return self.x * self.y

    def inverted(self) -> PoolStateV2:
        """The same pool seen from the Y side (trading Y for X)."""
        return replace(
            self, pair=self.pair.inverted(), x=self.y, y=self.x, fees_x=self.fees_y, fees_y=self.fees_x
        )


@dataclass(frozen=True)
class SwapResultV2:
    amount_in: float
    amount_out: float
    transaction_price: float
    new_state: PoolStateV2


def quoted_price(pool: PoolStateV2, inverse: bool = False) -> float:
    """P_XY = y/x, or P_YX = x/y with ``inverse``."""
    return pool.x / pool.y if inverse else pool.y / pool.x


def amount_out(pool: PoolStateV2, dx: float) -> float:
    dx = check_positive(dx, "dx")
    net = pool.phi * dx
    return pool.y * net / (pool.x + net)


def transaction_price(pool: PoolStateV2, dx: float) -> float:
    """Output per unit of net (post-fee) input: y / (x + phi*dx)."""
    dx = check_positive(dx, "dx")
    return pool.y / (pool.x + pool.phi * dx)


def execute_swap(pool: PoolStateV2, dx: float) -> SwapResultV2:
    """Sell ``dx`` of X into the pool and return the post-trade state."""
    dy = amount_out(pool, dx)
    net = pool.phi * dx
    new_state = replace(pool, x=pool.x + net, y=pool.y - dy, fees_x=pool.fees_x + pool.fee * dx)
    return SwapResultV2(dx, dy, pool.y / (pool.x + net), new_state)


def half_spread(pool: PoolStateV2, dx: float) -> float:
    """Quoted half-spread in bps for selling ``dx`` of X."""
    dx = check_positive(dx, "dx")
    net = pool.phi * dx
    return to_bps(net / (pool.x + net))


def ba_spread(pool: PoolStateV2, usd_size: float, usd_price_x: float, usd_price_y: float) -> float:
    """Average of the X->Y and Y->X half-spreads for the same dollar size, in bps.

    Dollar sizes are converted to token amounts at the supplied pre-trade USD prices.
    """
    check_price(usd_price_x, "usd price of X")
    check_price(usd_price_y, "usd price of Y")
    dx = usd_to_token_amount(usd_price_x, usd_size)
    dy = usd_to_token_amount(usd_price_y, usd_size)
    return 0.5 * (half_spread(pool, dx) + half_spread(pool.inverted(), dy))


@dataclass(frozen=True)
class ImpermanentLoss:
    delta_p: float
    lp_return: float
    hold_return: float
    value: float


def impermanent_loss_v2(delta_p: float, percentage: bool = False) -> ImpermanentLoss:
    """IL of a full-range position after a gross price change ``delta_p = P'/P``.

    The default is the difference ``R_H - R_LP``. With ``percentage`` the ratio
    form ``R_LP / R_H - 1`` is returned instead (non-positive).
    """
    delta_p = check_positive(delta_p, "delta_p")
    r_lp = math.sqrt(delta_p)
    r_h = 0.5 * (delta_p + 1.0)
    value = r_lp / r_h - 1.0 if percentage else r_h - r_lp
    return ImpermanentLoss(delta_p, r_lp, r_h, value)
