import dataclasses
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dexcex import amm_v2, lob
from dexcex.amm_v2 import PoolStateV2
from dexcex.config import Config
from dexcex.costs import (
    CostBreakdown,
    GasPoint,
    GasPriceSeries,
    GasSchedule,
    WithdrawFeeSchedule,
    cheapest,
    gas_cost_usd,
    tc_cex,
    tc_dex,
)
from dexcex.domain import Pair, Token
from dexcex.errors import CoverageError, DomainError
from dexcex.io import parse_gas_csv, parse_lob_csv, parse_pool_v2_csv, parse_pool_v3_json, parse_withdraw_fees_csv
from dexcex.lob import LobSnapshot
from dexcex.panel import CEX_BEST, DEX_BEST, V2_VENUE, V3_VENUE, MarketData, summarize, tc_panel

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
PAIR = Pair.parse("ETH-USDC")
GAS = GasPriceSeries((GasPoint(100, 50e-9, 2000.0), GasPoint(105, 60e-9, 2100.0)))


def test_gas_cost_examples():
    assert gas_cost_usd(118_340, 100, GAS) == pytest.approx(11.834, rel=1e-12)
    assert gas_cost_usd(0, 100, GAS) == 0.0
    assert gas_cost_usd(65_000, 100, GAS) == pytest.approx(6.5, rel=1e-12)


def test_gas_lookup_resolves_backwards():
    assert GAS.at(104).gas_price == 50e-9
    assert GAS.at(105).gas_price == 60e-9
    assert GAS.at(10**6).native_usd == 2100.0
    with pytest.raises(CoverageError):
        GAS.at(99)


def test_gas_schedule_defaults_and_kinds():
    g = GasSchedule()
    assert (g.swap_units_v2, g.swap_units_v3) == (118_340, 130_889)
    assert g.deposit_units(Token.from_symbol("ETH")) == 21_000
    assert g.deposit_units(Token.from_symbol("USDC")) == 65_000
    with pytest.raises(DomainError):
        GasSchedule(swap_units_v2=0)


def test_withdraw_fee_forward_fill():
    sched = WithdrawFeeSchedule({"USDC": ((10, 20.0), (20, 15.0))})
    assert sched.fee("USDC", 10) == 20.0
    assert sched.fee("USDC", 19) == 20.0
    assert sched.fee("USDC", 25) == 15.0
    with pytest.raises(CoverageError):
        sched.fee("USDC", 9)
    with pytest.raises(CoverageError):
        sched.fee("DAI", 30)
    with pytest.raises(DomainError):
        WithdrawFeeSchedule({"USDC": ((1, -1.0),)})


def test_tc_dex_examples():
    c = tc_dex(0.0, 30.0, 30.0, 100_000)
    assert c.settlement == pytest.approx(3.0, rel=1e-14)
    assert c.total == pytest.approx(33.0, rel=1e-14)
    assert tc_dex(0.0, 30.0, 0.0, 5000).total == 30.0
    assert tc_dex(0.0, 30.0, 30.0, 200_000).settlement == c.settlement / 2


def test_tc_cex_examples():
    # USD components chosen so their bps equal the published rows
    c = tc_cex(0.404, 10.0, 0.42, 18.806, 10_000, "binance")
    assert c.settlement == pytest.approx(19.226, rel=1e-12)
    assert c.total == pytest.approx(29.630, abs=1e-9)
    d = tc_cex(321.179, 26.0, 6.5, 10.8, 1_000_000, "kraken")
    assert d.total == pytest.approx(347.352, abs=1e-9)
    assert tc_cex(5.0, 10.0, 0.0, 0.0, 1000).total == 15.0


def test_breakdown_rejects_inconsistent_total():
    with pytest.raises(DomainError):
        CostBreakdown(1.0, 2.0, 3.0, 6.5, "x", 100.0)


@given(
    st.floats(0, 1e4), st.floats(0, 100), st.floats(0, 1e3), st.floats(0, 1e3), st.floats(1.0, 1e8)
)
def test_additivity_and_settlement_recovery(spread, fee, gas, wfee, size):
    c = tc_cex(spread, fee, gas, wfee, size)
    assert c.total - (c.spread + c.exchange_fee + c.settlement) == 0.0
    assert c.settlement_usd == pytest.approx(gas + wfee, rel=1e-12, abs=1e-300)


def test_cheapest_relabels_and_keeps_origin():
    a = tc_dex(1.0, 30.0, 1.0, 1000, V2_VENUE)
    b = tc_dex(1.0, 5.0, 1.0, 1000, V3_VENUE)
    best = cheapest([a, b], DEX_BEST)
    assert (best.venue, best.detail, best.total) == (DEX_BEST, V3_VENUE, b.total)


def test_convexity_interior_minimum():
    """Spread grows with size, settlement shrinks: the total has an interior minimum."""
    bids = [(2000 - 0.5 * (i + 1) ** 2, 2.0 * 1.4**i) for i in range(30)]
    asks = [(2000 + 0.5 * (i + 1) ** 2, 2.0 * 1.4**i) for i in range(30)]
    book = LobSnapshot(PAIR, 100, tuple(bids), tuple(asks), "binance")
    totals = []
    for size in (1e3, 1e4, 1e5, 1e6):
        spread = lob.spread_lob(book, size / 2000)
        totals.append(tc_cex(spread, 10.0, 2.1, 17.126, size).total)
    k = totals.index(min(totals))
    assert 0 < k < len(totals) - 1


# -- panel --------------------------------------------------------------------


def small_market():
    v2 = PoolStateV2(PAIR, 5000.0, 1e7, 0.003)
    bids = ((1999.0, 100.0),)
    asks = ((2001.0, 100.0),)
    return MarketData(
        pools_v2=[(100, v2)],
        books=[LobSnapshot(PAIR, 100, bids, asks, "binance")],
        gas=GAS,
        withdraw_fees=WithdrawFeeSchedule({"USDC": ((0, 17.126),)}),
    )


def test_singleton_panel_matches_direct_calls():
    data = small_market()
    data.books = []
    rows = tc_panel(data, sizes=[10_000])
    v2_rows = [r for r in rows if r.cost.venue == V2_VENUE]
    assert len(v2_rows) == 1
    pool = data.pools_v2[0][1]
    expected = tc_dex(
        amm_v2.ba_spread(pool, 10_000, 2000.0, 1.0), 30.0, gas_cost_usd(118_340, 100, GAS), 10_000
    )
    assert v2_rows[0].cost.total == expected.total
    assert {r.cost.venue for r in rows} == {V2_VENUE, DEX_BEST}


def test_panel_cex_row_and_dw_toggle():
    data = small_market()
    rows = tc_panel(data, sizes=[10_000])
    binance = next(r for r in rows if r.cost.venue == "binance").cost
    spread = 1e4 * 2 / 4000
    dw = 21_000 * 50e-9 * 2000 + 17.126
    assert binance.spread == pytest.approx(spread, rel=1e-12)
    assert binance.exchange_fee == 10.0
    assert binance.settlement == pytest.approx(dw / 10_000 * 1e4, rel=1e-12)
    no_dw = tc_panel(data, sizes=[10_000], config=dataclasses.replace(Config(), include_dw=False))
    binance2 = next(r for r in no_dw if r.cost.venue == "binance").cost
    assert binance.total - binance2.total == pytest.approx(dw, rel=1e-12)
    assert binance2.settlement == 0.0


def test_panel_omits_venues_without_data():
    data = small_market()
    data.gas = None
    venues = {r.cost.venue for r in tc_panel(data, sizes=[1000])}
    assert V2_VENUE not in venues
    assert DEX_BEST not in venues
    assert tc_panel(MarketData()) == []


def load_fixture_market():
    def load(parser, name):
        with open(FIXTURES / name) as fh:
            return parser(fh)

    v2, e1 = load(parse_pool_v2_csv, "pools_v2.csv")
    v3, e2 = load(parse_pool_v3_json, "pools_v3.json")
    books, e3 = load(parse_lob_csv, "lob.csv")
    gas, e4 = load(parse_gas_csv, "gas.csv")
    wf, e5 = load(parse_withdraw_fees_csv, "wfees.csv")
    assert not (e1 or e2 or e3 or e4 or e5)
    return MarketData(v2, v3, books, gas, wf)


def test_fixture_panel_best_columns_are_minima():
    rows = tc_panel(load_fixture_market())
    cells: dict = {}
    for r in rows:
        cells.setdefault((r.stamp, r.pair, r.cost.trade_usd), {})[r.cost.venue] = r.cost.total
    assert cells
    for venues in cells.values():
        dex = [v for k, v in venues.items() if k in (V2_VENUE, V3_VENUE)]
        cex = [v for k, v in venues.items() if k in ("binance", "kraken")]
        if dex:
            assert venues[DEX_BEST] == min(dex)
        if cex:
            assert venues[CEX_BEST] == min(cex)
    for r in rows:
        c = r.cost
        assert c.total - (c.spread + c.exchange_fee + c.settlement) == 0.0


def test_fixture_panel_convexity():
    rows = tc_panel(load_fixture_market())
    hour0 = min(r.stamp for r in rows)
    totals = [
        r.cost.total
        for r in sorted(rows, key=lambda r: r.cost.trade_usd)
        if r.stamp == hour0 and r.cost.venue == "binance"
    ]
    assert len(totals) == 4
    k = totals.index(min(totals))
    assert 0 < k < 3


def test_summary_means_match_independent_average():
    rows = tc_panel(load_fixture_market())
    means = summarize(rows)
    for m in means:
        members = [
            r.cost.total
            for r in rows
            if r.pair == m.pair and r.cost.venue == m.cost.venue and r.cost.trade_usd == m.cost.trade_usd
        ]
        assert m.cost.total == pytest.approx(sum(members) / len(members), rel=1e-12)


def test_panel_is_deterministic():
    a = tc_panel(load_fixture_market())
    b = tc_panel(load_fixture_market())
    assert a == b
    assert [r.key for r in a] == sorted(r.key for r in a)
