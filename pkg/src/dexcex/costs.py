"""Gas model, settlement costs and the total-cost decompositions.

Every cost is expressed in basis points of the trade's dollar size:

    DEX:  total = spread + pool fee + swap gas / size
    CEX:  total = spread + taker fee + (deposit gas + withdrawal fee) / size
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Sequence

from .domain import HourStamp, Token, check_positive, to_bps
from .errors import CoverageError, DomainError, FormatError


@dataclass(frozen=True)
class GasSchedule:
    swap_units_v2: int = 118_340
    swap_units_v3: int = 130_889
    transfer_native: int = 21_000
    transfer_erc20: int = 65_000

    def __post_init__(self) -> None:
        for name in ("swap_units_v2", "swap_units_v3", "transfer_native", "transfer_erc20"):
            if getattr(self, name) <= 0:
                raise DomainError(f"{name} must be positive")

    def deposit_units(self, token: Token) -> int:
        return self.transfer_native if token.is_native else self.transfer_erc20


@dataclass(frozen=True)
class GasPoint:
    stamp: HourStamp
    gas_price: float  # native units per gas unit
    native_usd: float


@dataclass(frozen=True)
class GasPriceSeries:
    points: tuple[GasPoint, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", tuple(self.points))
        stamps = [p.stamp for p in self.points]
        if any(b <= a for a, b in zip(stamps, stamps[1:])):
            raise FormatError("gas price stamps must be strictly increasing")
        for p in self.points:
            check_positive(p.gas_price, "gas price")
            check_positive(p.native_usd, "native token price")
        object.__setattr__(self, "_stamps", stamps)

    def at(self, stamp: int) -> GasPoint:
        """Latest point at or before ``stamp``."""
        i = bisect.bisect_right(self._stamps, stamp) - 1
        if i < 0:
            raise CoverageError(f"hour {stamp} precedes the gas series")
        return self.points[i]


@dataclass(frozen=True)
class WithdrawFeeSchedule:
    """Stepwise-constant withdrawal fees per token, in units of that token."""

    snapshots: dict[str, tuple[tuple[int, float], ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for token, rows in self.snapshots.items():
            stamps = [s for s, _ in rows]
            if any(b <= a for a, b in zip(stamps, stamps[1:])):
                raise FormatError(f"withdrawal fee stamps for {token} must be strictly increasing")
            if any(fee < 0 for _, fee in rows):
                raise DomainError(f"negative withdrawal fee for {token}")

    def fee(self, token: str, stamp: int) -> float:
        rows = self.snapshots.get(token, ())
        i = bisect.bisect_right([s for s, _ in rows], stamp) - 1
        if i < 0:
            raise CoverageError(f"no withdrawal fee for {token} at or before hour {stamp}")
        return rows[i][1]


@dataclass(frozen=True)
class CostBreakdown:
    """All components in bps of ``trade_usd``; ``total`` is their plain sum."""

    spread: float
    exchange_fee: float
    settlement: float
    total: float
    venue: str
    trade_usd: float
    detail: str = ""

    def __post_init__(self) -> None:
        if self.total != self.spread + self.exchange_fee + self.settlement:
            raise DomainError("cost total must equal the sum of its components")

    @property
    def settlement_usd(self) -> float:
        return self.settlement / 1e4 * self.trade_usd


def _breakdown(
    spread: float, fee: float, settlement_usd: float, trade_usd: float, venue: str, detail: str
) -> CostBreakdown:
    trade_usd = check_positive(trade_usd, "trade size")
    settlement = to_bps(settlement_usd / trade_usd)
    return CostBreakdown(
        spread, fee, settlement, spread + fee + settlement, venue, trade_usd, detail
    )


def gas_cost_usd(units: int, stamp: int, series: GasPriceSeries) -> float:
    point = series.at(stamp)
    return units * point.gas_price * point.native_usd


def tc_dex(
    spread: float,
    fee_tier: float,
    swap_gas_usd: float,
    trade_usd: float,
    venue: str = "dex",
    detail: str = "",
) -> CostBreakdown:
    return _breakdown(spread, fee_tier, swap_gas_usd, trade_usd, venue, detail)


def tc_cex(
    spread: float,
    taker_fee: float,
    deposit_gas_usd: float,
    withdraw_fee_usd: float,
    trade_usd: float,
    venue: str = "cex",
    detail: str = "",
) -> CostBreakdown:
    return _breakdown(
        spread, taker_fee, deposit_gas_usd + withdraw_fee_usd, trade_usd, venue, detail
    )


def cheapest(costs: Sequence[CostBreakdown], venue: str) -> CostBreakdown:
    """The lowest-total breakdown, relabelled as ``venue`` (first wins ties)."""
    best = min(costs, key=lambda c: c.total)
    return CostBreakdown(
        best.spread, best.exchange_fee, best.settlement, best.total, venue, best.trade_usd,
        best.venue,
    )
