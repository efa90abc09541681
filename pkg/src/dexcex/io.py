"""File formats: the five input schemas, the three output schemas.

Parsers are forgiving per record and strict per file: a malformed row becomes
an :class:`IngestError` in the returned list and parsing continues, while a
missing header or out-of-order stamps raise :class:`FormatError`.

Writers emit basis-point columns with six decimals and every other float as
its shortest round-trip ``repr`` so output is byte-stable and re-parses exactly.
"""

from __future__ import annotations

import csv
import json
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

from .amm_v2 import PoolStateV2
from .amm_v3 import PoolStateV3, TickGrid
from .arbitrage import DeviationSeries, Triplet, TripletQuoteSeries, quote_series
from .costs import GasPoint, GasPriceSeries, WithdrawFeeSchedule
from .domain import NATIVE_SYMBOLS, HourStamp, Pair, from_bps
from .equilibrium import DayObservation, EquilibriumRow, PairDailySeries, daily_il
from .errors import DomainError, FormatError, TripletError
from .lob import LobSnapshot
from .panel import PanelRow

POOL_V2_HEADER = ("ts_hour", "pair", "x", "y", "fee_bps")
LOB_HEADER = ("ts_hour", "pair", "side", "price", "volume")
GAS_HEADER = ("ts_hour", "gas_price", "native_usd")
WFEE_HEADER = ("ts_hour", "token", "fee_tokens")
QUOTES_HEADER = ("ts_hour", "exchange", "leg", "price")
DAILY_HEADER = ("day", "pair", "volume", "delta_p", "liquidity")
PANEL_HEADER = (
    "ts_hour", "pair", "venue", "size_usd", "spread_bps", "fee_bps", "settlement_bps",
    "total_bps", "detail",
)
DEVIATION_HEADER = ("ts_hour", "series", "theta_bps", "abs_theta_bps", "source", "top_decile_abs_bps")
EQUILIBRIUM_HEADER = (
    "pair", "day", "expected_volume", "expected_il", "predicted_liquidity", "observed_liquidity",
)


@dataclass(frozen=True)
class IngestError:
    file: str
    line: int
    reason: str

    def __post_init__(self) -> None:
        if self.line < 1:
            raise ValueError("line numbers start at 1")

    def __str__(self) -> str:
        return f"{self.file}:{self.line}: {self.reason}"


def fmt_bps(value: float) -> str:
    return f"{value:.6f}"


def fmt_num(value: float) -> str:
    return repr(float(value))


def _int(text: str) -> int:
    value = float(text)
    if not value.is_integer():
        raise ValueError(f"expected an integer, got {text!r}")
    return int(value)


def _float(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"non-finite number {text!r}")
    return value


def _reader(stream: IO[str], required: Sequence[str], name: str):
    """Yield ``(line_number, row_dict)`` after checking the header."""
    reader = csv.reader(stream)
    header = next(reader, None)
    if header is None:
        raise FormatError(f"{name}: empty file, expected header {','.join(required)}")
    header = [h.strip() for h in header]
    missing = [h for h in required if h not in header]
    if missing:
        raise FormatError(f"{name}: header lacks columns {missing}")
    for row in reader:
        if not row or all(not c.strip() for c in row):
            continue
        line = reader.line_num
        if len(row) != len(header):
            yield line, None
            continue
        yield line, dict(zip(header, (c.strip() for c in row)))


def _name(stream: IO[str], name: str | None) -> str:
    return name or getattr(stream, "name", "<stream>")


# --- inputs -----------------------------------------------------------------


def parse_pool_v2_csv(
    stream: IO[str], name: str | None = None, native: frozenset[str] = NATIVE_SYMBOLS
) -> tuple[list[tuple[HourStamp, PoolStateV2]], list[IngestError]]:
    name = _name(stream, name)
    pools, errors = [], []
    for line, row in _reader(stream, POOL_V2_HEADER, name):
        if row is None:
            errors.append(IngestError(name, line, "wrong number of fields"))
            continue
        try:
            pool = PoolStateV2(
                Pair.parse(row["pair"], native),
                _float(row["x"]),
                _float(row["y"]),
                from_bps(_float(row["fee_bps"])),
                pool_id=row.get("pool_id", ""),
            )
            pools.append((HourStamp(_int(row["ts_hour"])), pool))
        except (ValueError, KeyError) as exc:
            errors.append(IngestError(name, line, str(exc)))
    return pools, errors


def parse_pool_v3_json(
    stream: IO[str], name: str | None = None, native: frozenset[str] = NATIVE_SYMBOLS
) -> tuple[list[tuple[HourStamp, PoolStateV3]], list[IngestError]]:
    """A JSON array of pool objects; errors are numbered by record (1-based)."""
    name = _name(stream, name)
    try:
        records = json.load(stream)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{name}: invalid JSON ({exc})") from exc
    if not isinstance(records, list):
        raise FormatError(f"{name}: expected a JSON array of pool objects")
    pools, errors = [], []
    for n, rec in enumerate(records, start=1):
        try:
            if not isinstance(rec, dict):
                raise ValueError("record is not an object")
            ticks = [_float(str(t)) for t in rec["ticks"]]
            liquidity = [_float(str(v)) for v in rec["liquidity"]]
            if len(liquidity) != len(ticks) - 1:
                raise ValueError(
                    f"{len(liquidity)} liquidity values for {len(ticks)} ticks (need one fewer)"
                )
            tier = rec["fee_tier_bps"]
            if isinstance(tier, float) and tier.is_integer():
                tier = int(tier)
            pool = PoolStateV3(
                Pair.parse(rec["pair"], native),
                tier,
                TickGrid(tuple(ticks)),
                tuple(liquidity),
                _float(str(rec["current_price"])),
                pool_id=str(rec.get("pool_id", "")),
            )
            pools.append((HourStamp(_int(str(rec["ts_hour"]))), pool))
        except (ValueError, KeyError, TypeError) as exc:
            errors.append(IngestError(name, n, f"{type(exc).__name__}: {exc}"))
    return pools, errors


def parse_lob_csv(
    stream: IO[str], name: str | None = None, native: frozenset[str] = NATIVE_SYMBOLS
) -> tuple[list[LobSnapshot], list[IngestError]]:
    """Rows are grouped into one snapshot per (hour, pair, exchange); row order is irrelevant.

    The ``exchange`` column is optional and defaults to ``cex``.
    """
    name = _name(stream, name)
    groups: dict[tuple[int, str, str], dict] = {}
    errors = []
    for line, row in _reader(stream, LOB_HEADER, name):
        if row is None:
            errors.append(IngestError(name, line, "wrong number of fields"))
            continue
        try:
            stamp = _int(row["ts_hour"])
            pair = Pair.parse(row["pair"], native)
            side = row["side"].lower()
            if side not in ("bid", "ask"):
                raise ValueError(f"side must be bid or ask, got {row['side']!r}")
            price, volume = _float(row["price"]), _float(row["volume"])
            if price <= 0 or volume <= 0:
                raise ValueError("price and volume must be positive")
        except (ValueError, KeyError) as exc:
            errors.append(IngestError(name, line, str(exc)))
            continue
        key = (stamp, pair.name, row.get("exchange") or "cex")
        g = groups.setdefault(key, {"pair": pair, "line": line, "bid": [], "ask": []})
        g[side].append((price, volume))
    books = []
    for (stamp, _, exchange), g in sorted(groups.items()):
        try:
            books.append(LobSnapshot.from_levels(g["pair"], stamp, g["bid"], g["ask"], exchange))
        except DomainError as exc:
            errors.append(IngestError(name, g["line"], str(exc)))
    return books, errors


def parse_gas_csv(stream: IO[str], name: str | None = None) -> tuple[GasPriceSeries, list[IngestError]]:
    name = _name(stream, name)
    points, errors = [], []
    for line, row in _reader(stream, GAS_HEADER, name):
        if row is None:
            errors.append(IngestError(name, line, "wrong number of fields"))
            continue
        try:
            gp, usd = _float(row["gas_price"]), _float(row["native_usd"])
            if gp <= 0 or usd <= 0:
                raise ValueError("gas price and native price must be positive")
            points.append(GasPoint(HourStamp(_int(row["ts_hour"])), gp, usd))
        except ValueError as exc:
            errors.append(IngestError(name, line, str(exc)))
    _check_monotone([p.stamp for p in points], f"{name}: gas")
    return GasPriceSeries(tuple(points)), errors


def parse_withdraw_fees_csv(
    stream: IO[str], name: str | None = None
) -> tuple[WithdrawFeeSchedule, list[IngestError]]:
    name = _name(stream, name)
    rows: dict[str, list[tuple[int, float]]] = defaultdict(list)
    errors = []
    for line, row in _reader(stream, WFEE_HEADER, name):
        if row is None:
            errors.append(IngestError(name, line, "wrong number of fields"))
            continue
        try:
            token = row["token"]
            if not token:
                raise ValueError("empty token symbol")
            fee = _float(row["fee_tokens"])
            if fee < 0:
                raise ValueError("withdrawal fee must be non-negative")
            rows[token].append((_int(row["ts_hour"]), fee))
        except ValueError as exc:
            errors.append(IngestError(name, line, str(exc)))
    for token, entries in rows.items():
        _check_monotone([s for s, _ in entries], f"{name}: withdrawal fees for {token}")
    return WithdrawFeeSchedule({t: tuple(v) for t, v in sorted(rows.items())}), errors


def parse_quotes_csv(
    stream: IO[str], name: str | None = None, native: frozenset[str] = NATIVE_SYMBOLS
) -> tuple[list[TripletQuoteSeries], list[IngestError]]:
    """One quote series per exchange, in order of first appearance.

    The triplet is inferred from the three distinct legs in the file, oriented
    starting from the first leg seen.
    """
    name = _name(stream, name)
    obs: dict[str, list[tuple[int, Pair, float]]] = {}
    legs: dict[str, Pair] = {}
    errors = []
    for line, row in _reader(stream, QUOTES_HEADER, name):
        if row is None:
            errors.append(IngestError(name, line, "wrong number of fields"))
            continue
        try:
            pair = Pair.parse(row["leg"], native)
            price = _float(row["price"])
            if price <= 0:
                raise ValueError("price must be positive")
            stamp = _int(row["ts_hour"])
            exchange = row["exchange"]
            if not exchange:
                raise ValueError("empty exchange name")
        except ValueError as exc:
            errors.append(IngestError(name, line, str(exc)))
            continue
        legs.setdefault(pair.name, pair)
        obs.setdefault(exchange, []).append((stamp, pair, price))
    if not obs:
        return [], errors
    try:
        triplet = Triplet.from_pairs(legs.values())
    except TripletError as exc:
        raise FormatError(f"{name}: {exc}") from exc
    series = []
    for exchange, rows in obs.items():
        per_leg: dict[str, list[int]] = defaultdict(list)
        for stamp, pair, _ in rows:
            per_leg[pair.name].append(stamp)
        for leg, stamps in per_leg.items():
            _check_monotone(stamps, f"{name}: {exchange} {leg}")
        series.append(quote_series(triplet, exchange, rows))
    return series, errors


def parse_daily_panel_csv(
    stream: IO[str], name: str | None = None
) -> tuple[list[PairDailySeries], list[IngestError]]:
    """Pair-day rows ``day,pair,volume,delta_p,liquidity``; IL is derived from ``delta_p``."""
    name = _name(stream, name)
    by_pair: dict[str, list[DayObservation]] = defaultdict(list)
    errors = []
    for line, row in _reader(stream, DAILY_HEADER, name):
        if row is None:
            errors.append(IngestError(name, line, "wrong number of fields"))
            continue
        try:
            delta_p = _float(row["delta_p"])
            if delta_p <= 0:
                raise ValueError("delta_p must be positive")
            obs = DayObservation(
                _int(row["day"]), _float(row["volume"]), daily_il(1.0, delta_p),
                _float(row["liquidity"]),
            )
            by_pair[row["pair"]].append(obs)
        except ValueError as exc:
            errors.append(IngestError(name, line, str(exc)))
    for pair, days in by_pair.items():
        _check_monotone([d.day for d in days], f"{name}: {pair} days")
    return [PairDailySeries(p, tuple(d)) for p, d in sorted(by_pair.items())], errors


def _check_monotone(stamps: Sequence[int], what: str) -> None:
    for a, b in zip(stamps, stamps[1:]):
        if b <= a:
            raise FormatError(f"{what}: stamps not strictly increasing ({a} then {b})")


# --- input writers (fixtures, round trips) ----------------------------------


def _writer(stream: IO[str], header: Sequence[str]):
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header)
    return w


def write_pool_v2_csv(stream: IO[str], pools: Iterable[tuple[int, PoolStateV2]]) -> None:
    w = _writer(stream, POOL_V2_HEADER + ("pool_id",))
    for stamp, p in pools:
        w.writerow([stamp, p.pair.name, fmt_num(p.x), fmt_num(p.y), fmt_num(p.fee_bps), p.pool_id])


def write_pool_v3_json(stream: IO[str], pools: Iterable[tuple[int, PoolStateV3]]) -> None:
    records = [
        {
            "ts_hour": stamp,
            "pair": p.pair.name,
            "pool_id": p.pool_id,
            "fee_tier_bps": p.fee_tier_bps,
            "current_price": p.current_price,
            "ticks": list(p.grid.boundaries),
            "liquidity": list(p.liquidity),
        }
        for stamp, p in pools
    ]
    json.dump(records, stream, indent=1)
    stream.write("\n")


def write_lob_csv(stream: IO[str], books: Iterable[LobSnapshot]) -> None:
    w = _writer(stream, LOB_HEADER + ("exchange",))
    for b in books:
        for side, levels in (("bid", b.bids), ("ask", b.asks)):
            for price, volume in levels:
                w.writerow([b.stamp, b.pair.name, side, fmt_num(price), fmt_num(volume), b.exchange])


def write_gas_csv(stream: IO[str], series: GasPriceSeries) -> None:
    w = _writer(stream, GAS_HEADER)
    for p in series.points:
        w.writerow([p.stamp, fmt_num(p.gas_price), fmt_num(p.native_usd)])


def write_withdraw_fees_csv(stream: IO[str], schedule: WithdrawFeeSchedule) -> None:
    w = _writer(stream, WFEE_HEADER)
    for token, rows in sorted(schedule.snapshots.items()):
        for stamp, fee in rows:
            w.writerow([stamp, token, fmt_num(fee)])


def write_quotes_csv(stream: IO[str], series: Iterable[TripletQuoteSeries]) -> None:
    w = _writer(stream, QUOTES_HEADER)
    for s in series:
        for p in s.points:
            for leg, price in zip(s.triplet.legs, (p.p_xy, p.p_yz, p.p_zx)):
                w.writerow([p.stamp, s.exchange, leg.name, fmt_num(price)])


def write_daily_panel_csv(stream: IO[str], rows: Iterable[tuple[int, str, float, float, float]]) -> None:
    w = _writer(stream, DAILY_HEADER)
    for day, pair, volume, delta_p, liquidity in rows:
        w.writerow([day, pair, fmt_num(volume), fmt_num(delta_p), fmt_num(liquidity)])


# --- outputs ----------------------------------------------------------------


def write_panel_csv(stream: IO[str], rows: Iterable[PanelRow]) -> None:
    w = _writer(stream, PANEL_HEADER)
    for r in rows:
        c = r.cost
        w.writerow([
            r.stamp, r.pair, c.venue, fmt_num(c.trade_usd), fmt_bps(c.spread),
            fmt_bps(c.exchange_fee), fmt_bps(c.settlement), fmt_bps(c.total), c.detail,
        ])


def read_panel_csv(stream: IO[str]) -> list[dict]:
    out = []
    for _, row in _reader(stream, PANEL_HEADER, "panel"):
        if row is None:
            raise FormatError("panel: wrong number of fields")
        rec: dict = dict(row)
        rec["ts_hour"] = int(row["ts_hour"])
        for k in PANEL_HEADER[3:8]:
            rec[k] = float(row[k])
        out.append(rec)
    return out


def write_deviations_csv(
    stream: IO[str],
    series: Sequence[DeviationSeries],
    bands: dict[str, list[tuple[int, float | None]]],
) -> None:
    w = _writer(stream, DEVIATION_HEADER)
    for s in series:
        band = dict(bands.get(s.name, ()))
        for p in s.points:
            b = band.get(p.stamp)
            w.writerow([
                p.stamp, s.name, fmt_bps(p.theta * 1e4), fmt_bps(abs(p.theta) * 1e4), p.source,
                "" if b is None else fmt_bps(b * 1e4),
            ])


def read_deviations_csv(stream: IO[str]) -> list[dict]:
    out = []
    for _, row in _reader(stream, DEVIATION_HEADER, "deviations"):
        if row is None:
            raise FormatError("deviations: wrong number of fields")
        band = row["top_decile_abs_bps"]
        out.append({
            "ts_hour": int(row["ts_hour"]),
            "series": row["series"],
            "theta_bps": float(row["theta_bps"]),
            "abs_theta_bps": float(row["abs_theta_bps"]),
            "source": row["source"],
            "top_decile_abs_bps": float(band) if band else None,
        })
    return out


def write_equilibrium_csv(stream: IO[str], rows: Iterable[EquilibriumRow]) -> None:
    w = _writer(stream, EQUILIBRIUM_HEADER)
    for r in rows:
        w.writerow([
            r.pair, r.day, fmt_num(r.expected_volume), fmt_num(r.expected_il),
            "" if r.predicted is None else fmt_num(r.predicted), fmt_num(r.observed),
        ])


def read_equilibrium_csv(stream: IO[str]) -> list[EquilibriumRow]:
    out = []
    for _, row in _reader(stream, EQUILIBRIUM_HEADER, "equilibrium"):
        if row is None:
            raise FormatError("equilibrium: wrong number of fields")
        pred = row["predicted_liquidity"]
        out.append(EquilibriumRow(
            row["pair"], int(row["day"]), float(row["expected_volume"]),
            float(row["expected_il"]), float(pred) if pred else None,
            float(row["observed_liquidity"]),
        ))
    return out

