"""Hourly transaction-cost panel across AMM pools and order books."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import amm_v2, amm_v3, lob
from .amm_v2 import PoolStateV2
from .amm_v3 import PoolStateV3
from .config import Config
from .costs import (
    CostBreakdown,
    GasPriceSeries,
    WithdrawFeeSchedule,
    cheapest,
    gas_cost_usd,
    tc_cex,
    tc_dex,
)
from .domain import HourStamp
from .errors import CoverageError, DomainError
from .lob import LobSnapshot

V2_VENUE = "uniswap_v2"
V3_VENUE = "uniswap_v3"
DEX_BEST = "dex_best"
CEX_BEST = "cex_best"


@dataclass
class MarketData:
    pools_v2: list[tuple[int, PoolStateV2]] = field(default_factory=list)
    pools_v3: list[tuple[int, PoolStateV3]] = field(default_factory=list)
    books: list[LobSnapshot] = field(default_factory=list)
    gas: GasPriceSeries | None = None
    withdraw_fees: WithdrawFeeSchedule | None = None

    def hours(self) -> list[int]:
        stamps = {s for s, _ in self.pools_v2} | {s for s, _ in self.pools_v3}
        stamps |= {b.stamp for b in self.books}
        return sorted(stamps)


@dataclass(frozen=True)
class PanelRow:
    stamp: HourStamp
    pair: str
    cost: CostBreakdown

    @property
    def key(self) -> tuple:
        return (self.stamp, self.pair, self.cost.trade_usd, self.cost.venue)


class UsdPricer:
    """Dollar prices of tokens within one hour.

    Stablecoins are worth one dollar and the native token is valued from the
    gas series; anything else is chained through the hour's quoted prices
    (book mids first, then v2 reserves, then v3 quotes).
    """

    def __init__(
        self, quotes: Sequence[tuple[str, str, float]], config: Config, native_usd: float | None
    ) -> None:
        known: dict[str, float] = {t: 1.0 for t in config.usd_stable_tokens}
        if native_usd is not None:
            for t in config.native_tokens:
                known.setdefault(t, native_usd)
        changed = True
        while changed:
            changed = False
            for base, quote, price in quotes:
                if base not in known and quote in known:
                    known[base] = price * known[quote]
                    changed = True
                elif quote not in known and base in known:
                    known[quote] = known[base] / price
                    changed = True
        self.prices = known

    def get(self, symbol: str) -> float | None:
        return self.prices.get(symbol)


def _hour_quotes(v2, v3, books) -> list[tuple[str, str, float]]:
    quotes = []
    for book in books:
        try:
            quotes.append((book.pair.base.symbol, book.pair.quote.symbol, lob.mid_price(book)))
        except DomainError:
            pass
    for pool in v2:
        quotes.append((pool.pair.base.symbol, pool.pair.quote.symbol, amm_v2.quoted_price(pool)))
    for pool in v3:
        quotes.append((pool.pair.base.symbol, pool.pair.quote.symbol, pool.current_price))
    return quotes


def _group(items: Iterable[tuple[int, object]]) -> dict[tuple[int, str], list]:
    out: dict[tuple[int, str], list] = defaultdict(list)
    for stamp, obj in items:
        out[(stamp, obj.pair.name)].append(obj)
    return out


def tc_panel(
    data: MarketData,
    sizes: Sequence[float] | None = None,
    pairs: Sequence[str] | None = None,
    config: Config | None = None,
) -> list[PanelRow]:
    """Cost breakdown per (hour, pair, size, venue), plus per-category best venues.

    Venues lacking data at an hour (no gas price, thin book, untradeable pool,
    unpriceable token) are left out rather than filled with zeros.
    """
    config = config or Config()
    sizes = tuple(sizes or config.sizes)
    v2_by = _group(data.pools_v2)
    v3_by = _group(data.pools_v3)
    books_by = _group((b.stamp, b) for b in data.books)
    gas_units = config.gas

    rows: list[PanelRow] = []
    for hour in data.hours():
        names = {p for (h, p) in list(v2_by) + list(v3_by) + list(books_by) if h == hour}
        if pairs is not None:
            names &= set(pairs)
        try:
            gas_point = data.gas.at(hour) if data.gas is not None else None
        except CoverageError:
            gas_point = None
        native_usd = gas_point.native_usd if gas_point else None
        quotes = _hour_quotes(
            [p for n in sorted(names) for p in v2_by.get((hour, n), [])],
            [p for n in sorted(names) for p in v3_by.get((hour, n), [])],
            [b for n in sorted(names) for b in books_by.get((hour, n), [])],
        )
        pricer = UsdPricer(quotes, config, native_usd)

        for name in sorted(names):
            v2_pools = v2_by.get((hour, name), [])
            v3_pools = v3_by.get((hour, name), [])
            books = books_by.get((hour, name), [])
            pair = (v2_pools or v3_pools or books)[0].pair
            # sizes are priced in the quote token; each venue converts to base
            # units at its own pre-trade quote (pool price or book mid)
            py = pricer.get(pair.quote.symbol)
            if py is None:
                continue
            for size in sizes:
                dex: list[CostBreakdown] = []
                cex: list[CostBreakdown] = []
                if gas_point is not None:
                    g2 = gas_cost_usd(gas_units.swap_units_v2, hour, data.gas)
                    for n, pool in enumerate(v2_pools):
                        px = amm_v2.quoted_price(pool) * py
                        spread = amm_v2.ba_spread(pool, size, px, py)
                        venue = V2_VENUE if len(v2_pools) == 1 else f"{V2_VENUE}:{pool.pool_id or n}"
                        dex.append(tc_dex(spread, pool.fee_bps, g2, size, venue, pool.pool_id))
                    if v3_pools:
                        g3 = gas_cost_usd(gas_units.swap_units_v3, hour, data.gas)
                        try:
                            pid, best = amm_v3.best_pool(v3_pools, size, g3, usd_price_y=py)
                        except DomainError:
                            pass
                        else:
                            dex.append(tc_dex(best.spread, best.exchange_fee, g3, size, V3_VENUE, pid))
                for book in sorted(books, key=lambda b: b.exchange):
                    cost = _cex_cost(book, size, py, hour, data, config)
                    if cost is not None:
                        cex.append(cost)
                found = dex + cex
                if dex:
                    found.append(cheapest(dex, DEX_BEST))
                if cex:
                    found.append(cheapest(cex, CEX_BEST))
                rows.extend(PanelRow(HourStamp(hour), name, c) for c in found)
    rows.sort(key=lambda r: r.key)
    return rows


def _cex_cost(
    book: LobSnapshot, size: float, py: float, hour: int, data: MarketData, config: Config
) -> CostBreakdown | None:
    try:
        spread = lob.spread_lob(book, size / (lob.mid_price(book) * py))
    except DomainError:
        return None
    deposit = withdraw = 0.0
    if config.include_dw:
        if data.gas is None or data.withdraw_fees is None:
            return None
        try:
            deposit = gas_cost_usd(config.gas.deposit_units(book.pair.base), hour, data.gas)
            withdraw = data.withdraw_fees.fee(book.pair.quote.symbol, hour) * py
        except CoverageError:
            return None
    return tc_cex(spread, config.taker_fee(book.exchange), deposit, withdraw, size, book.exchange)


def summarize(rows: Sequence[PanelRow]) -> list[PanelRow]:
    """Time-series means per (pair, venue, size); the stamp of each row is the first hour."""
    groups: dict[tuple[str, str, float], list[PanelRow]] = defaultdict(list)
    for r in rows:
        groups[(r.pair, r.cost.venue, r.cost.trade_usd)].append(r)
    out = []
    for (pair, venue, size), members in sorted(groups.items()):
        n = len(members)
        spread = math.fsum(m.cost.spread for m in members) / n
        fee = math.fsum(m.cost.exchange_fee for m in members) / n
        settle = math.fsum(m.cost.settlement for m in members) / n
        cost = CostBreakdown(spread, fee, settle, spread + fee + settle, venue, size)
        out.append(PanelRow(members[0].stamp, pair, cost))
    return out
