"""Triangular law-of-one-price deviations.

For a cycle X -> Y -> Z -> X with quoted prices P_XY, P_YZ, P_ZX the
deviation is ``theta = P_XY * P_YZ * P_ZX - 1``; it is zero when the three
quotes are mutually consistent.
"""

from __future__ import annotations

import bisect
import enum
import math
from collections import defaultdict, deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import amm_v2
from .amm_v2 import PoolStateV2
from .amm_v3 import PoolStateV3
from .domain import HourStamp, Pair, check_positive, check_price
from .errors import TripletError
from .lob import LobSnapshot, mid_price


class PriceSource(enum.Enum):
    LOB_MID = "lob_mid"
    V2_RESERVE_RATIO = "v2_reserve_ratio"
    V3_QUOTED = "v3_quoted"
    QUOTED = "quoted"


@dataclass(frozen=True)
class Triplet:
    legs: tuple[Pair, Pair, Pair]

    def __post_init__(self) -> None:
        if len(self.legs) != 3:
            raise TripletError("a triplet has exactly three legs")
        for k in range(3):
            if self.legs[k].quote != self.legs[(k + 1) % 3].base:
                names = ", ".join(p.name for p in self.legs)
                raise TripletError(f"legs {names} do not close a cycle")
        if len({p.base.symbol for p in self.legs}) != 3:
            raise TripletError("a triplet needs three distinct currencies")

    @classmethod
    def from_pairs(cls, pairs: Iterable[Pair]) -> Triplet:
        """Orient three pairs (in any direction) into a cycle starting from the first one."""
        pairs = list(pairs)
        if len(pairs) != 3 or len({frozenset((p.base, p.quote)) for p in pairs}) != 3:
            raise TripletError("need three distinct pairs to form a triplet")
        legs = [pairs[0]]
        rest = pairs[1:]
        while rest:
            want = legs[-1].quote
            for p in rest:
                if p.base == want:
                    legs.append(p)
                    break
                if p.quote == want:
                    legs.append(p.inverted())
                    break
            else:
                raise TripletError(f"no leg continues the cycle from {want.symbol}")
            rest.remove(p)
        return cls((legs[0], legs[1], legs[2]))

    @property
    def name(self) -> str:
        return "-".join(p.base.symbol for p in self.legs)

    def orientation(self, pair: Pair) -> tuple[int, bool] | None:
        """(leg index, inverted?) for a pair quoted in either direction."""
        for k, leg in enumerate(self.legs):
            if pair == leg:
                return k, False
            if pair == leg.inverted():
                return k, True
        return None


@dataclass(frozen=True)
class QuotePoint:
    stamp: HourStamp
    p_xy: float
    p_yz: float
    p_zx: float


@dataclass(frozen=True)
class TripletQuoteSeries:
    triplet: Triplet
    exchange: str
    points: tuple[QuotePoint, ...]

    def __post_init__(self) -> None:
        stamps = [p.stamp for p in self.points]
        if any(b <= a for a, b in zip(stamps, stamps[1:])):
            raise TripletError("quote stamps must be strictly increasing")
        for p in self.points:
            for v in (p.p_xy, p.p_yz, p.p_zx):
                check_price(v)


@dataclass(frozen=True)
class DeviationPoint:
    stamp: HourStamp
    theta: float
    source: str = ""


@dataclass(frozen=True)
class DeviationSeries:
    name: str
    points: tuple[DeviationPoint, ...]


def theta(p_xy: float, p_yz: float, p_zx: float) -> float:
    return check_price(p_xy) * check_price(p_yz) * check_price(p_zx) - 1.0


def _observations(records: Iterable, price_source: PriceSource):
    """Yield ``(stamp, pair, price)`` from records of the kind matching ``price_source``."""
    for rec in records:
        if price_source is PriceSource.LOB_MID:
            yield rec.stamp, rec.pair, mid_price(rec)
        elif price_source is PriceSource.V2_RESERVE_RATIO:
            stamp, pool = rec
            yield stamp, pool.pair, amm_v2.quoted_price(pool)
        elif price_source is PriceSource.V3_QUOTED:
            stamp, pool = rec
            yield stamp, pool.pair, pool.current_price
        else:
            yield rec


def quote_series(
    triplet: Triplet,
    exchange: str,
    records: Iterable[LobSnapshot | tuple[int, PoolStateV2] | tuple[int, PoolStateV3] | tuple],
    price_source: PriceSource | str = PriceSource.QUOTED,
) -> TripletQuoteSeries:
    """Assemble hourly triplet quotes, inverting legs quoted the other way round.

    With ``QUOTED`` the records are ``(stamp, pair, price)`` tuples. Hours missing
    any leg are dropped; records for unrelated pairs are ignored.
    """
    price_source = PriceSource(price_source)
    by_hour: dict[int, dict[int, float]] = defaultdict(dict)
    for stamp, pair, price in _observations(records, price_source):
        where = triplet.orientation(pair)
        if where is None:
            continue
        k, inverted = where
        by_hour[int(stamp)][k] = 1.0 / price if inverted else price
    points = tuple(
        QuotePoint(HourStamp(h), legs[0], legs[1], legs[2])
        for h, legs in sorted(by_hour.items())
        if len(legs) == 3
    )
    return TripletQuoteSeries(triplet, exchange, points)


def deviation_series(src: TripletQuoteSeries) -> DeviationSeries:
    return DeviationSeries(
        src.exchange,
        tuple(
            DeviationPoint(p.stamp, theta(p.p_xy, p.p_yz, p.p_zx), src.exchange)
            for p in src.points
        ),
    )


def min_abs_combine(series: Sequence[DeviationSeries], name: str = "min_abs") -> DeviationSeries:
    """Per hour, the deviation closest to zero among the series quoting that hour.

    Ties go to the series listed first; each point keeps the winning series' name.
    """
    best: dict[int, DeviationPoint] = {}
    for s in series:
        for p in s.points:
            current = best.get(p.stamp)
            if current is None or abs(p.theta) < abs(current.theta):
                best[p.stamp] = DeviationPoint(p.stamp, p.theta, s.name)
    return DeviationSeries(name, tuple(best[h] for h in sorted(best)))


def nearest_rank(sorted_values: Sequence[float], q: float) -> float:
    """Nearest-rank quantile of already sorted values."""
    n = len(sorted_values)
    rank = max(1, math.ceil(q * n - 1e-9))
    return sorted_values[rank - 1]


def rolling_top_decile(
    series: DeviationSeries, window_hours: int = 168, min_points: int = 10, q: float = 0.9
) -> list[tuple[HourStamp, float | None]]:
    """Trailing nearest-rank quantile of |theta| over ``(t - window_hours, t]``.

    ``None`` until the window holds ``min_points`` observations.
    """
    if window_hours < 1:
        raise ValueError("window must be at least one hour")
    window: deque[DeviationPoint] = deque()
    ordered: list[float] = []
    out = []
    for p in series.points:
        window.append(p)
        bisect.insort(ordered, abs(p.theta))
        while window[0].stamp <= p.stamp - window_hours:
            old = window.popleft()
            del ordered[bisect.bisect_left(ordered, abs(old.theta))]
        band = nearest_rank(ordered, q) if len(ordered) >= min_points else None
        out.append((p.stamp, band))
    return out


def _leg_pool(pools: Sequence[PoolStateV2], leg: Pair) -> PoolStateV2:
    for pool in pools:
        if pool.pair == leg:
            return pool
        if pool.pair == leg.inverted():
            return pool.inverted()
    raise TripletError(f"no pool for leg {leg.name}")


def cycle_return(triplet: Triplet, pools: Sequence[PoolStateV2], notional: float) -> float:
    """Profit per unit of X from swapping X -> Y -> Z -> X through constant-product pools."""
    amount = check_positive(notional, "notional")
    for leg in triplet.legs:
        amount = amm_v2.amount_out(_leg_pool(pools, leg), amount)
    return amount / notional - 1.0
