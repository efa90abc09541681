"""Command-line entry point.

Exit codes: 0 success, 1 fatal input format problem, 2 domain error,
64 usage error. Per-record ingest errors go to stderr and do not fail the run.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from . import amm_v2, amm_v3, arbitrage, equilibrium, io
from .config import Config
from .errors import DomainError, FormatError
from .panel import MarketData, summarize, tc_panel

EXIT_OK, EXIT_FORMAT, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit(2), which we reserve for domain errors
        raise UsageError(f"{self.prog}: {message}")


def _sizes(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad size list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dexcex", description="DEX/CEX market-quality toolkit")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    tc = sub.add_parser("tc-table", help="hourly transaction-cost panel")
    tc.add_argument("--pools-v2", type=Path)
    tc.add_argument("--pools-v3", type=Path)
    tc.add_argument("--lob", type=Path)
    tc.add_argument("--gas", type=Path)
    tc.add_argument("--wfees", type=Path)
    tc.add_argument("--sizes", type=_sizes)
    tc.add_argument("--pairs", help="comma-separated pair filter, e.g. ETH-USDC")
    tc.add_argument("--no-dw", action="store_true", help="drop deposit/withdrawal costs")
    tc.add_argument("--config", type=Path)
    tc.add_argument("--summary", type=Path, help="also write time-series means here")
    tc.add_argument("--out", type=Path, required=True)

    arb = sub.add_parser("arb-scan", help="triangular deviations and rolling bands")
    arb.add_argument("--quotes", type=Path, required=True)
    arb.add_argument("--window-hours", type=int, default=168)
    arb.add_argument("--config", type=Path)
    arb.add_argument("--out", type=Path, required=True)

    il = sub.add_parser("il", help="impermanent loss for a gross price change")
    il.add_argument("--delta-p", type=float, required=True)
    il.add_argument("--v3", action="store_true", help="position centred on --p with lower bound --pa")
    il.add_argument("--p", type=float)
    il.add_argument("--pa", type=float)
    il.add_argument("--percentage", action="store_true")

    route = sub.add_parser("route", help="cheapest single pool for a trade")
    route.add_argument("--pools-v3", type=Path, required=True)
    route.add_argument("--pools-v2", type=Path)
    route.add_argument("--size", type=float, required=True)
    route.add_argument("--gas-usd", type=float, required=True)
    route.add_argument("--pair")
    route.add_argument("--usd-price-x", type=float)
    route.add_argument("--usd-price-y", type=float, default=1.0)

    eq = sub.add_parser("eq-fit", help="equilibrium liquidity vs observed")
    eq.add_argument("--panel", type=Path, required=True)
    eq.add_argument("--window-days", type=int, choices=(5, 14, 20), default=14)
    eq.add_argument("--fee-bps", type=float, default=30.0)
    eq.add_argument("--out", type=Path, required=True)
    return p


def _report(errors: Sequence[io.IngestError]) -> None:
    for e in errors:
        print(f"ingest error: {e}", file=sys.stderr)


def _load(path: Path | None, parser, errors: list, **kw):
    if path is None:
        return None
    with open(path, newline="") as fh:
        value, errs = parser(fh, name=str(path), **kw)
    errors.extend(errs)
    return value


def _config(path: Path | None) -> Config:
    return Config.load(path) if path else Config()


def cmd_tc_table(args) -> int:
    config = _config(args.config)
    if args.no_dw:
        config = replace(config, include_dw=False)
    native = config.native_tokens
    errors: list[io.IngestError] = []
    data = MarketData(
        pools_v2=_load(args.pools_v2, io.parse_pool_v2_csv, errors, native=native) or [],
        pools_v3=_load(args.pools_v3, io.parse_pool_v3_json, errors, native=native) or [],
        books=_load(args.lob, io.parse_lob_csv, errors, native=native) or [],
        gas=_load(args.gas, io.parse_gas_csv, errors),
        withdraw_fees=_load(args.wfees, io.parse_withdraw_fees_csv, errors),
    )
    _report(errors)
    pairs = args.pairs.split(",") if args.pairs else None
    rows = tc_panel(data, args.sizes or config.sizes, pairs, config)
    with open(args.out, "w", newline="") as fh:
        io.write_panel_csv(fh, rows)
    if args.summary:
        with open(args.summary, "w", newline="") as fh:
            io.write_panel_csv(fh, summarize(rows))
    print(f"wrote {len(rows)} rows to {args.out} ({len(errors)} ingest errors)")
    return EXIT_OK


def cmd_arb_scan(args) -> int:
    config = _config(args.config)
    errors: list[io.IngestError] = []
    quotes = _load(args.quotes, io.parse_quotes_csv, errors, native=config.native_tokens)
    _report(errors)
    per_exchange = [arbitrage.deviation_series(q) for q in quotes]
    output = list(per_exchange)
    for label, members in (
        ("cex_min_abs", [s for s in per_exchange if not config.is_dex(s.name)]),
        ("dex_min_abs", [s for s in per_exchange if config.is_dex(s.name)]),
    ):
        if members:
            output.append(arbitrage.min_abs_combine(members, label))
    bands = {s.name: arbitrage.rolling_top_decile(s, args.window_hours) for s in output}
    with open(args.out, "w", newline="") as fh:
        io.write_deviations_csv(fh, output, bands)
    for s in output:
        n = len(s.points)
        mean_abs = sum(abs(p.theta) for p in s.points) / n * 1e4 if n else float("nan")
        print(f"{s.name}: {n} hours, mean |theta| = {mean_abs:.6f} bps")
    return EXIT_OK


def _g(value: float) -> str:
    return f"{value:.12g}"


def cmd_il(args) -> int:
    if args.v3:
        if args.p is None or args.pa is None:
            raise UsageError("il --v3 needs --p and --pa")
        res = amm_v3.impermanent_loss_v3(args.delta_p, args.p, args.pa)
        print(f"IL={_g(res.value)}")
        print(f"lambda={_g(res.leverage)}")
        print(f"IL2={_g(res.il_v2)}")
        return EXIT_OK
    res = amm_v2.impermanent_loss_v2(args.delta_p, percentage=args.percentage)
    print(f"IL={_g(res.value)}")
    print(f"R_LP={_g(res.lp_return)}")
    print(f"R_H={_g(res.hold_return)}")
    return EXIT_OK


def cmd_route(args) -> int:
    errors: list[io.IngestError] = []
    records = list(_load(args.pools_v3, io.parse_pool_v3_json, errors))
    records += _load(args.pools_v2, io.parse_pool_v2_csv, errors) or []
    _report(errors)
    if args.pair:
        records = [(s, p) for s, p in records if p.pair.name == args.pair]
    pairs = {p.pair.name for _, p in records}
    if len(pairs) != 1:
        raise DomainError(f"need pools for exactly one pair, found {sorted(pairs) or 'none'}")
    latest = max(s for s, _ in records)
    pools = [p for s, p in records if s == latest]
    pid, cost = amm_v3.best_pool(
        pools, args.size, args.gas_usd, args.usd_price_x, args.usd_price_y
    )
    print(f"pool={pid} hour={latest} pair={pools[0].pair.name} size_usd={_g(args.size)}")
    print(
        f"spread_bps={io.fmt_bps(cost.spread)} fee_bps={io.fmt_bps(cost.exchange_fee)} "
        f"gas_bps={io.fmt_bps(cost.settlement)} total_bps={io.fmt_bps(cost.total)}"
    )
    return EXIT_OK


def cmd_eq_fit(args) -> int:
    errors: list[io.IngestError] = []
    series = _load(args.panel, io.parse_daily_panel_csv, errors)
    _report(errors)
    rows = equilibrium.equilibrium_panel(series, args.fee_bps / 1e4, args.window_days)
    with open(args.out, "w", newline="") as fh:
        io.write_equilibrium_csv(fh, rows)
    fit = equilibrium.model_fit([r.observed for r in rows], [r.predicted for r in rows])
    print(
        f"slope={fit.slope:.6f} intercept={fit.intercept:.6f} "
        f"r_squared={fit.r_squared:.6f} n={fit.n_observations}"
    )
    return EXIT_OK


COMMANDS = {
    "tc-table": cmd_tc_table,
    "arb-scan": cmd_arb_scan,
    "il": cmd_il,
    "route": cmd_route,
    "eq-fit": cmd_eq_fit,
}


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("missing subcommand; one of " + ", ".join(COMMANDS))
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, OSError) as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
