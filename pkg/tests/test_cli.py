import csv
from pathlib import Path

import pytest

from dexcex.cli import main

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def tc_args(out, *extra):
    f = FIXTURES
    return [
        "tc-table", "--pools-v2", str(f / "pools_v2.csv"), "--pools-v3", str(f / "pools_v3.json"),
        "--lob", str(f / "lob.csv"), "--gas", str(f / "gas.csv"), "--wfees", str(f / "wfees.csv"),
        "--sizes", "1e3,1e4,1e5,1e6", "--out", str(out), *extra,
    ]


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_il_command(capsys):
    assert main(["il", "--delta-p", "4"]) == 0
    assert capsys.readouterr().out.split() == ["IL=0.5", "R_LP=2", "R_H=2.5"]
    assert main(["il", "--delta-p", "1"]) == 0
    assert "IL=0\n" in capsys.readouterr().out
    assert main(["il", "--delta-p", "4", "--v3", "--p", "1", "--pa", "0.25"]) == 0
    out = capsys.readouterr().out
    assert "IL=1\n" in out and "lambda=2\n" in out


def test_exit_codes(tmp_path, capsys):
    assert main(["il", "--delta-p", "-1"]) == 2
    assert main(["il", "--delta-p", "4", "--v3", "--p", "1", "--pa", "0.25", "--bogus"]) == 64
    assert main(["frobnicate"]) == 64
    assert main([]) == 64
    bad = tmp_path / "bad.csv"
    bad.write_text("nothing,useful\n")
    assert main(["eq-fit", "--panel", str(bad), "--out", str(tmp_path / "o.csv")]) == 1
    assert main(["eq-fit", "--panel", str(tmp_path / "missing.csv"), "--out", str(tmp_path / "o.csv")]) == 1
    capsys.readouterr()


def test_tc_table_reproduces_binance_row(tmp_path):
    out = tmp_path / "panel.csv"
    assert main(tc_args(out)) == 0
    hit = [
        r for r in rows(out)
        if r["venue"] == "binance" and r["size_usd"] == "10000.0" and r["ts_hour"] == "480000"
    ]
    assert len(hit) == 1
    r = hit[0]
    assert (r["spread_bps"], r["fee_bps"], r["settlement_bps"], r["total_bps"]) == (
        "0.404000", "10.000000", "19.226000", "29.630000",
    )


def test_no_dw_lowers_cex_rows_by_settlement(tmp_path):
    with_dw, without = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(tc_args(with_dw)) == 0
    assert main(tc_args(without, "--no-dw")) == 0
    a = {(r["ts_hour"], r["venue"], r["size_usd"]): r for r in rows(with_dw)}
    b = {(r["ts_hour"], r["venue"], r["size_usd"]): r for r in rows(without)}
    for key in a:
        if key[1] in ("binance", "kraken"):
            diff = float(a[key]["total_bps"]) - float(b[key]["total_bps"])
            assert diff == pytest.approx(float(a[key]["settlement_bps"]), abs=2e-6)
            assert float(b[key]["settlement_bps"]) == 0.0


def test_arb_scan_emits_series_and_bands(tmp_path, capsys):
    out = tmp_path / "dev.csv"
    assert main(["arb-scan", "--quotes", str(FIXTURES / "quotes.csv"), "--window-hours", "168", "--out", str(out)]) == 0
    recs = rows(out)
    names = {r["series"] for r in recs}
    assert {"binance", "kraken", "cex_min_abs", "dex_min_abs"} <= names
    by = {}
    for r in recs:
        by.setdefault(r["ts_hour"], {})[r["series"]] = abs(float(r["theta_bps"]))
    for vals in by.values():
        assert vals["cex_min_abs"] <= min(vals["binance"], vals["kraken"])
    assert any(r["top_decile_abs_bps"] for r in recs)
    capsys.readouterr()


def test_route_prints_choice(capsys):
    assert main(["route", "--pools-v3", str(FIXTURES / "pools_v3.json"), "--size", "10000", "--gas-usd", "20"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("pool=") and "total_bps=" in out


def test_eq_fit(tmp_path, capsys):
    out = tmp_path / "eq.csv"
    assert main(["eq-fit", "--panel", str(FIXTURES / "daily_panel.csv"), "--window-days", "5", "--fee-bps", "30", "--out", str(out)]) == 0
    assert "slope=" in capsys.readouterr().out
    assert len(rows(out)) > 0


@pytest.mark.parametrize("command", ["tc-table", "arb-scan", "eq-fit", "route", "il"])
def test_commands_are_deterministic(tmp_path, capsys, command):
    outputs = []
    for run in range(2):
        (tmp_path / str(run)).mkdir()
        out = tmp_path / str(run) / "out.csv"
        if command == "tc-table":
            argv = tc_args(out)
        elif command == "arb-scan":
            argv = ["arb-scan", "--quotes", str(FIXTURES / "quotes.csv"), "--out", str(out)]
        elif command == "eq-fit":
            argv = ["eq-fit", "--panel", str(FIXTURES / "daily_panel.csv"), "--out", str(out)]
        elif command == "route":
            argv = ["route", "--pools-v3", str(FIXTURES / "pools_v3.json"), "--pools-v2",
                    str(FIXTURES / "pools_v2.csv"), "--size", "100000", "--gas-usd", "12"]
        else:
            argv = ["il", "--delta-p", "1.37", "--percentage"]
        capsys.readouterr()
        assert main(argv) == 0
        printed = capsys.readouterr().out.replace(str(tmp_path / str(run)), "")
        outputs.append((out.read_bytes() if out.exists() else b"", printed))
    assert outputs[0] == outputs[1]
