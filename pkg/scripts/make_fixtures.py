"""Regenerate the synthetic fixtures under ``fixtures/``.

The ETH-USDC Binance book is built so that a 10,000 USD trade costs
0.404 bps of spread and 19.226 USD of deposit gas plus withdrawal fee,
which with the 10 bps taker fee gives the 29.630 bps total of the Binance
ETH-USDC row. Deeper levels widen quickly so total cost over the size grid
has an interior minimum.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from dexcex import io
from dexcex.amm_v2 import PoolStateV2
from dexcex.amm_v3 import PoolStateV3, geometric_grid
from dexcex.arbitrage import QuotePoint, Triplet, TripletQuoteSeries
from dexcex.costs import GasPoint, GasPriceSeries, WithdrawFeeSchedule
from dexcex.domain import Pair
from dexcex.equilibrium import predicted_liquidity
from dexcex.lob import LobSnapshot

OUT = Path(__file__).resolve().parent.parent / "fixtures"
HOUR0 = 480_000
ETH_USDC = Pair.parse("ETH-USDC")
MID = 2000.0
GAS_PRICE = 50e-9  # ETH per gas unit (50 gwei)
# deposit of ETH costs 21,000 * 50e-9 * 2000 = 2.1 USD; the rest is the USDC withdrawal fee
USDC_WITHDRAW = 19.226 - 2.1


def ladder(half_spreads_and_volumes):
    bids = [(MID - h, v) for h, v in half_spreads_and_volumes]
    asks = [(MID + h, v) for h, v in half_spreads_and_volumes]
    return bids, asks


def books():
    # top level: (a - b)/(a + b) = 0.1616/4000 = 0.404 bps
    binance = [(0.0808, 10.0), (1.0, 40.0), (5.0, 200.0), (20.0, 1000.0)]
    kraken = [(0.45, 4.0), (2.0, 30.0), (8.0, 150.0), (30.0, 1000.0)]
    out = []
    for h in range(3):
        for name, levels in (("binance", binance), ("kraken", kraken)):
            bids, asks = ladder(levels)
            out.append(LobSnapshot.from_levels(ETH_USDC, HOUR0 + h, bids, asks, name))
    return out


def pools_v2():
    return [(HOUR0 + h, PoolStateV2(ETH_USDC, 5000.0, 5000.0 * MID, 0.003)) for h in range(3)]


def pools_v3():
    out = []
    for h in range(3):
        for tier, n, L in ((5, 40, 2.0e6), (30, 12, 6.0e5)):
            grid = geometric_grid(MID, n, n, tier)
            liq = [L * math.exp(-(((i - n) / (n / 2.5)) ** 2)) for i in range(len(grid))]
            out.append((HOUR0 + h, PoolStateV3(ETH_USDC, tier, grid, tuple(liq), MID, f"v3-{tier}bps")))
    return out


def gas():
    return GasPriceSeries(tuple(
        GasPoint(HOUR0 + h, GAS_PRICE * (1.0 if h == 0 else 1.2), MID) for h in range(3)
    ))


def withdraw_fees():
    return WithdrawFeeSchedule({"USDC": ((HOUR0 - 24, round(USDC_WITHDRAW, 9)),), "ETH": ((HOUR0 - 24, 0.0016),)})


def quotes(rng: np.random.Generator, hours: int = 400):
    triplet = Triplet.from_pairs([Pair.parse("ETH-USDC"), Pair.parse("USDC-USDT"), Pair.parse("USDT-ETH")])
    noise = {"binance": 0.5e-4, "kraken": 1.5e-4, "uniswap_v2": 30e-4, "uniswap_v3": 10e-4}
    eth = MID * np.exp(np.cumsum(rng.normal(0, 0.004, hours)))
    series = []
    for exchange, scale in noise.items():
        pts = []
        for h in range(hours):
            usdt = 1.0 + rng.normal(0, 2e-4)
            shocks = np.exp(rng.normal(0, scale / math.sqrt(3), 3))
            p_xy = eth[h] * shocks[0]
            p_yz = usdt * shocks[1]
            p_zx = shocks[2] / (eth[h] * usdt)
            pts.append(QuotePoint(HOUR0 + h, float(p_xy), float(p_yz), float(p_zx)))
        series.append(TripletQuoteSeries(triplet, exchange, tuple(pts)))
    return series


def daily_panel(rng: np.random.Generator, days: int = 150):
    rows = []
    for pair, base_volume, vol in (("ETH-USDC", 40_000.0, 0.04), ("LINK-ETH", 250_000.0, 0.06)):
        volume = base_volume * np.exp(np.cumsum(rng.normal(0, 0.15, days)) * 0.3)
        sigma = vol * np.exp(np.cumsum(rng.normal(0, 0.1, days)) * 0.5)
        delta_p = np.exp(rng.normal(0, sigma))
        il = 0.5 * (delta_p + 1) - np.sqrt(delta_p)
        for d in range(days):
            lo = max(0, d - 14)
            ev = volume[lo:d].mean() if d else volume[0]
            eil = il[lo:d].mean() if d else il[0]
            liq = predicted_liquidity(0.003, ev, max(eil, 1e-9)) * math.exp(rng.normal(0, 0.1))
            rows.append((19_000 + d, pair, float(volume[d]), float(delta_p[d]), liq))
    return rows


def main() -> None:
    OUT.mkdir(exist_ok=True)
    rng = np.random.default_rng(20230201)
    with open(OUT / "lob.csv", "w", newline="") as fh:
        io.write_lob_csv(fh, books())
    with open(OUT / "pools_v2.csv", "w", newline="") as fh:
        io.write_pool_v2_csv(fh, pools_v2())
    with open(OUT / "pools_v3.json", "w") as fh:
        io.write_pool_v3_json(fh, pools_v3())
    with open(OUT / "gas.csv", "w", newline="") as fh:
        io.write_gas_csv(fh, gas())
    with open(OUT / "wfees.csv", "w", newline="") as fh:
        io.write_withdraw_fees_csv(fh, withdraw_fees())
    with open(OUT / "quotes.csv", "w", newline="") as fh:
        io.write_quotes_csv(fh, quotes(rng))
    with open(OUT / "daily_panel.csv", "w", newline="") as fh:
        io.write_daily_panel_csv(fh, daily_panel(rng))


if __name__ == "__main__":
    main()
