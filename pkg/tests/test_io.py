import csv
import json
import subprocess
import sys
from datetime import datetime, timedelta

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import seasonal_prices
from vrfbopt.cli import main
from vrfbopt.core import BatteryParams, Horizon, MarketSeries, ValidationError
from vrfbopt.io import (PriceFormatError, emit_report, load_config, load_prices, parse_config,
                       write_prices)
from vrfbopt.scheduler import run_algorithm1

START = datetime(2019, 1, 1)


def price_file(path, prices, skip=(), dup=()):
    rows = ["timestamp,price_usd_per_mwh"]
    for k, p in enumerate(prices):
        if k in skip:
            continue
        rows.append(f"{(START + timedelta(hours=k)).isoformat()},{p}")
        if k in dup:
            rows.append(rows[-1])
    path.write_text("\n".join(rows) + "\n")
    return path


def test_two_full_days(tmp_path):
    s = load_prices(price_file(tmp_path / "p.csv", range(48)))
    assert len(s) == 48
    assert s.start == START
    assert s.prices[47] == 47.0


def test_gap_reports_row(tmp_path):
    # hour 13 of day 1 (index 12) is missing; its successor is file line 14
    with pytest.raises(PriceFormatError, match="gap at row 14"):
        load_prices(price_file(tmp_path / "p.csv", range(48), skip={12}))


def test_duplicate_reports_row(tmp_path):
    with pytest.raises(PriceFormatError, match="duplicate timestamp at row 5"):
        load_prices(price_file(tmp_path / "p.csv", range(48), dup={2}))


def test_partial_day(tmp_path):
    with pytest.raises(PriceFormatError, match="horizon must be whole days"):
        load_prices(price_file(tmp_path / "p.csv", range(30)))


def test_non_numeric_price(tmp_path):
    path = price_file(tmp_path / "p.csv", ["1"] * 5 + ["abc"] + ["1"] * 18)
    with pytest.raises(PriceFormatError, match="row 7: non-numeric"):
        load_prices(path)


def test_bad_header(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("time,price\n")
    with pytest.raises(PriceFormatError, match="header"):
        load_prices(path)


def test_negative_prices_accepted(tmp_path):
    s = load_prices(price_file(tmp_path / "p.csv", [-20.5] * 24))
    assert s.prices.min() == -20.5


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-500, 2000, allow_nan=False), min_size=24, max_size=24))
def test_price_round_trip(tmp_path_factory, values):
    path = tmp_path_factory.mktemp("rt") / "p.csv"
    series = MarketSeries(np.array(values * 2), start=START)
    write_prices(series, path)
    back = load_prices(path)
    np.testing.assert_array_equal(back.prices, series.prices)
    assert back.start == START


def test_empty_config_defaults():
    cfg = parse_config("")
    p = cfg.params
    assert (p.eff_charge, p.eff_discharge, p.cycle_life, p.eol, p.vom_cost) == (0.897, 0.786, 20000, 0.3, 0.3)
    assert p.calendar_life == 3650
    assert (p.rho_split, p.sigma_restore, p.discount_rate, cfg.theta) == (0.5, 1.0, 0.07, 2)
    assert p == BatteryParams()


def test_config_values():
    cfg = parse_config("service_cost_usd = 500  # per visit\ncalendar_life_years = 20\nsolver_cmd = 'cbc {lp} {sol}'\n")
    assert cfg.params.service_cost == 500
    assert cfg.params.calendar_life == 7300
    assert cfg.solver.backend == "external"
    assert cfg.solver.solver_cmd == "cbc {lp} {sol}"


@pytest.mark.parametrize("text,match", [("eol = 2", "eol must be < 1"), ("colour = 3", "unknown key"),
                                        ("theta = 1.5", "integer"), ("restore_divisor = maybe", "true or false"),
                                        ("just words", "key = value")])
def test_config_errors(text, match):
    with pytest.raises(ValidationError, match=match):
        parse_config(text)


def test_load_config_file(tmp_path):
    path = tmp_path / "c.toml"
    path.write_text("# run\nrated_power_mw = 10\nrated_capacity_mwh = 10\n")
    assert load_config(path).params.rated_power == 10.0
    assert load_config(None).params == BatteryParams()


@pytest.fixture(scope="module")
def small_plan():
    p = BatteryParams(rated_power=1.0, cycle_life=100, service_cost=0.8, discount_rate=0.0)
    return run_algorithm1(p, seasonal_prices(12, 0), Horizon(12, hours_per_day=2), theta=1)


def test_report_files(tmp_path, small_plan):
    paths = emit_report(small_plan, tmp_path / "out")
    assert [p.name for p in paths] == ["plan.json", "dispatch.csv", "fade.csv", "sweep.csv"]
    headers = {p.name: next(csv.reader(open(p))) for p in paths[1:]}
    assert headers == {"dispatch.csv": ["t", "price", "P_c", "P_d", "SOC"],
                       "fade.csv": ["d", "q_cal", "q_cyc", "q", "b"],
                       "sweep.csv": ["x", "revenue", "net_revenue"]}
    doc = json.loads(paths[0].read_text())
    assert len(doc["service_days"]) == doc["x"] + 1 == small_plan.x + 1
    assert sum(doc["gaps"]) == 12
    fade = list(csv.reader(open(paths[2])))
    assert len(fade) == 13 and fade[-1][-1] == "1"
    assert len(list(csv.reader(open(paths[1])))) == 25


def test_report_values_come_from_result(tmp_path, small_plan):
    paths = emit_report(small_plan, tmp_path)
    doc = json.loads(paths[0].read_text())
    assert doc["revenue"]["net_revenue"] == pytest.approx(small_plan.breakdown.net_revenue, abs=1e-6)
    assert [r["x"] for r in doc["sweep"]] == [r.x for r in small_plan.sweep]
    assert '"x": ' in paths[0].read_text().splitlines()[1]


def test_cli_analytic(tmp_path, capsys):
    out = tmp_path / "curve.csv"
    assert main(["analytic", "--r", "100", "--q", "0.1", "--d", "200", "--k", "125", "--out", str(out)]) == 0
    assert capsys.readouterr().out.startswith("x_star=2 net_revenue=291.666667")
    rows = list(csv.reader(open(out)))
    assert rows[0] == ["x", "net_revenue"] and rows[3] == ["2", "291.666667"]


def test_cli_plan_and_validate(tmp_path, capsys):
    prices = tmp_path / "p.csv"
    write_prices(MarketSeries(seasonal_prices(3, 1, shape=[-1.0] * 12 + [1.0] * 12).prices, start=START), prices)
    cfg = tmp_path / "c.toml"
    cfg.write_text("rated_power_mw = 1\nservice_cost_usd = 1\ncycle_life = 100\n")
    assert main(["validate", "--config", str(cfg), "--prices", str(prices)]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["n_days"] == 3 and info["service_cost"] == 1.0
    out = tmp_path / "results"
    assert main(["plan", "--config", str(cfg), "--prices", str(prices), "--out", str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == ["dispatch.csv", "fade.csv", "plan.json", "sweep.csv"]
    assert main(["sweep", "--config", str(cfg), "--prices", str(prices), "--out", str(tmp_path / "s")]) == 0


def test_cli_missing_prices_is_usage_error(capsys):
    assert main(["plan"]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "usage"


def test_cli_bad_flag_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["plan", "--bogus"])
    assert exc.value.code == 2
    assert json.loads(capsys.readouterr().err)["error"] == "usage"


def test_cli_runtime_error_exits_1(tmp_path, capsys):
    prices = price_file(tmp_path / "p.csv", range(30))
    assert main(["validate", "--prices", str(prices)]) == 1
    assert "whole days" in json.loads(capsys.readouterr().err)["message"]


def test_cli_oracle_check(capsys):
    assert main(["oracle-check", "--days", "3", "--hours", "2", "--seed", "1"]) == 0
    assert json.loads(capsys.readouterr().out)["match"] is True


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "vrfbopt", "analytic", "--r", "100", "--q", "0.1",
                           "--d", "200", "--k", "250", "--out", "/dev/null/x.csv"], capture_output=True, text=True)
    assert proc.returncode == 1
    assert json.loads(proc.stderr)["error"]
