"""Limit-order-book execution against a static ladder snapshot."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .domain import HourStamp, Pair, check_positive, to_bps
from .errors import DepthError, DomainError, EmptyBookError

Level = tuple[float, float]  # (price, volume)


class Side(enum.Enum):
    BUY = "buy"
    SELL = "sell"


@dataclass(frozen=True)
class LobSnapshot:
    """Bids sorted best (highest) first, asks sorted best (lowest) first."""

    pair: Pair
    stamp: HourStamp
    bids: tuple[Level, ...]
    asks: tuple[Level, ...]
    exchange: str = "cex"

    def __post_init__(self) -> None:
        bids = tuple((float(p), float(v)) for p, v in self.bids)
        asks = tuple((float(p), float(v)) for p, v in self.asks)
        object.__setattr__(self, "bids", bids)
        object.__setattr__(self, "asks", asks)
        for p, v in bids + asks:
            check_positive(p, "level price")
            check_positive(v, "level volume")
        if any(b[0] >= a[0] for a, b in zip(bids, bids[1:])):
            raise DomainError("bids must be strictly descending in price")
        if any(b[0] <= a[0] for a, b in zip(asks, asks[1:])):
            raise DomainError("asks must be strictly ascending in price")
        if bids and asks and bids[0][0] >= asks[0][0]:
            raise DomainError(
                f"crossed book at hour {self.stamp}: bid {bids[0][0]} >= ask {asks[0][0]}"
            )

    @classmethod
    def from_levels(cls, pair: Pair, stamp: int, bids, asks, exchange: str = "cex") -> LobSnapshot:
        """Build a snapshot from unsorted levels, merging duplicate prices."""
        return cls(pair, HourStamp(stamp), _merge(bids, reverse=True), _merge(asks), exchange)


def _merge(levels, reverse: bool = False) -> tuple[Level, ...]:
    book: dict[float, float] = {}
    for price, volume in levels:
        book[float(price)] = book.get(float(price), 0.0) + float(volume)
    return tuple(sorted(book.items(), reverse=reverse))


@dataclass(frozen=True)
class FillReport:
    side: Side
    requested: float
    vw_price: float
    levels_consumed: int
    worst_price: float


def _walk(levels: tuple[Level, ...], dx: float, side: Side) -> FillReport:
    dx = check_positive(dx, "dx")
    available = sum(v for _, v in levels)
    if available < dx:
        raise DepthError(f"{side.value} of {dx} exceeds book depth {available}", available)
    remaining = dx
    notional = 0.0
    used = 0
    price = levels[0][0]
    for price, volume in levels:
        take = min(volume, remaining)
        notional += take * price
        remaining -= take
        used += 1
        if remaining <= 0:
            break
    return FillReport(side, dx, notional / dx, used, price)


def vw_bid(book: LobSnapshot, dx: float) -> FillReport:
    """Volume-weighted price received when selling ``dx`` into the bids."""
    return _walk(book.bids, dx, Side.SELL)


def vw_ask(book: LobSnapshot, dx: float) -> FillReport:
    """Volume-weighted price paid when buying ``dx`` from the asks."""
    return _walk(book.asks, dx, Side.BUY)


def spread_lob(book: LobSnapshot, dx: float) -> float:
    """Volume-weighted quoted half-spread ``(A - B)/(A + B)`` in bps."""
    a = vw_ask(book, dx).vw_price
    b = vw_bid(book, dx).vw_price
    return to_bps((a - b) / (a + b))


def mid_price(book: LobSnapshot) -> float:
    if not book.bids or not book.asks:
        raise EmptyBookError(f"book at hour {book.stamp} has an empty side")
    return 0.5 * (book.bids[0][0] + book.asks[0][0])
