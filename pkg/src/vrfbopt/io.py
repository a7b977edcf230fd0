"""Price ingestion, run configuration and report files."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

from .core import BatteryParams, Horizon, MarketSeries, ValidationError, validate_params
from .scheduler import PlanResult
from .solver import SolveOptions

PRICE_HEADER = ["timestamp", "price_usd_per_mwh"]
ONE_HOUR = timedelta(hours=1)


class PriceFormatError(ValidationError):
    pass


def load_prices(path, hours_per_day: int = 24, n_days: int | None = None) -> MarketSeries:
    """Read an hourly price CSV; rows are numbered as file lines (header = 1)."""
    stamps, values = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != PRICE_HEADER:
            raise PriceFormatError(f"expected header {','.join(PRICE_HEADER)!r}")
        for row_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise PriceFormatError(f"row {row_no}: expected 2 columns, got {len(row)}")
            try:
                ts = datetime.fromisoformat(row[0].strip())
            except ValueError:
                raise PriceFormatError(f"row {row_no}: bad timestamp {row[0]!r}") from None
            try:
                price = float(row[1])
            except ValueError:
                raise PriceFormatError(f"row {row_no}: non-numeric price {row[1]!r}") from None
            if not math.isfinite(price):
                raise PriceFormatError(f"row {row_no}: price must be finite")
            if stamps:
                step = ts - stamps[-1]
                if step == timedelta(0):
                    raise PriceFormatError(f"duplicate timestamp at row {row_no}")
                if step < timedelta(0):
                    raise PriceFormatError(f"timestamps not increasing at row {row_no}")
                if step != ONE_HOUR:
                    raise PriceFormatError(f"gap at row {row_no}")
            stamps.append(ts)
            values.append(price)
    if not values:
        raise PriceFormatError("price file holds no rows")
    if len(values) % hours_per_day:
        raise PriceFormatError(
            f"horizon must be whole days: {len(values)} rows is not a multiple of {hours_per_day}")
    if n_days is not None:
        need = n_days * hours_per_day
        if len(values) < need:
            raise PriceFormatError(f"price file covers {len(values)} hours, horizon needs {need}")
        values = values[:need]
    return MarketSeries(np.array(values), start=stamps[0])


def write_prices(series: MarketSeries, path) -> None:
    start = series.start or datetime(2019, 1, 1)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PRICE_HEADER)
        for k, v in enumerate(series.prices):
            w.writerow([(start + k * ONE_HOUR).isoformat(), repr(float(v))])


# config key -> (target, attribute, type); targets: params, horizon, run, solver
CONFIG_KEYS = {
    "rated_power_mw": ("params", "rated_power", float),
    "rated_capacity_mwh": ("params", "rated_capacity", float),
    "eff_charge": ("params", "eff_charge", float),
    "eff_discharge": ("params", "eff_discharge", float),
    "vom_cost_usd_per_mwh": ("params", "vom_cost", float),
    "calendar_life_years": ("run", "calendar_life_years", float),
    "cycle_life": ("params", "cycle_life", float),
    "eol": ("params", "eol", float),
    "rho_split": ("params", "rho_split", float),
    "sigma_restore": ("params", "sigma_restore", float),
    "service_cost_usd": ("params", "service_cost", float),
    "discount_rate": ("params", "discount_rate", float),
    "soc_init_mwh": ("params", "soc_init", float),
    "restore_divisor": ("params", "restore_divisor", bool),
    "n_days": ("run", "n_days", int),
    "hours_per_day": ("run", "hours_per_day", int),
    "days_per_year": ("run", "days_per_year", int),
    "theta": ("run", "theta", int),
    "big_m": ("run", "big_m", str),
    "prices": ("run", "prices", str),
    "out": ("run", "out", str),
    "solver_backend": ("solver", "backend", str),
    "solver_cmd": ("solver", "solver_cmd", str),
    "lp_engine": ("solver", "lp_engine", str),
    "mip_gap": ("solver", "mip_gap", float),
    "feas_tol": ("solver", "feas_tol", float),
    "time_limit_s": ("solver", "time_limit", float),
    "node_limit": ("solver", "node_limit", int),
    "workers": ("solver", "workers", int),
}


@dataclass
class RunConfig:
    params: BatteryParams = field(default_factory=BatteryParams)
    calendar_life_years: float = 10.0
    n_days: int | None = None
    hours_per_day: int = 24
    days_per_year: int = 365
    theta: int = 2
    big_m: str = "tight"
    prices: str | None = None
    out: str | None = None
    solver: SolveOptions = field(default_factory=SolveOptions)

    def horizon(self, n_hours: int | None = None) -> Horizon:
        n_days = self.n_days
        if n_days is None:
            if n_hours is None:
                raise ValidationError("n_days is unset and no price series to infer it from")
            n_days = n_hours // self.hours_per_day
        return Horizon(n_days, self.hours_per_day, self.days_per_year)


def _coerce(key, raw: str, kind):
    text = raw.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        text = text[1:-1]
        if kind is not str:
            raise ValidationError(f"{key}: expected a {kind.__name__}, got a string")
        return text
    if kind is bool:
        if text.lower() in ("true", "false"):
            return text.lower() == "true"
        raise ValidationError(f"{key}: expected true or false")
    if kind is str:
        return text
    try:
        value = float(text.replace("_", ""))
    except ValueError:
        raise ValidationError(f"{key}: {text!r} is not a number") from None
    if kind is int:
        if value != int(value):
            raise ValidationError(f"{key}: expected an integer")
        return int(value)
    return value


def parse_config(text: str) -> RunConfig:
    """Parse flat ``key = value`` lines merged over the defaults."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValidationError(f"config line {lineno}: expected 'key = value'")
        key, rest = (part.strip() for part in line.split("=", 1))
        if not (rest.startswith('"') or rest.startswith("'")):
            rest = rest.split("#", 1)[0].strip()
        if key not in CONFIG_KEYS:
            raise ValidationError(f"config line {lineno}: unknown key {key!r}")
        values[key] = _coerce(key, rest, CONFIG_KEYS[key][2])

    groups = {"params": {}, "run": {}, "solver": {}}
    for key, value in values.items():
        target, attr, _ = CONFIG_KEYS[key]
        groups[target][attr] = value
    if "solver_cmd" in values and "solver_backend" not in values:
        groups["solver"]["backend"] = "external"

    cfg = RunConfig(**groups["run"])
    cal_days = cfg.calendar_life_years * cfg.days_per_year
    params = replace(BatteryParams(calendar_life=cal_days), **groups["params"])
    try:
        solver = SolveOptions(**groups["solver"])
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    cfg.params = validate_params(params)
    cfg.solver = solver
    if cfg.theta < 0:
        raise ValidationError("theta must be >= 0")
    if cfg.big_m not in ("tight", "eol"):
        raise ValidationError("big_m must be 'tight' or 'eol'")
    return cfg


def load_config(path=None) -> RunConfig:
    if path is None:
        return parse_config("")
    return parse_config(Path(path).read_text())


def _fmt(v) -> str:
    v = float(v)
    if abs(v) < 5e-7:
        v = 0.0
    return f"{v:.6f}"


def _json(obj, indent=0) -> str:
    """JSON with floats fixed at six decimals and insertion-ordered keys."""
    pad = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + "  " * indent + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) for v in obj):
            return "[" + ", ".join(_json(v, indent) for v in obj) + "]"
        items = [pad + _json(v, indent + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + "  " * indent + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        if not math.isfinite(obj):
            return "null"
        return _fmt(obj)
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def plan_document(result: PlanResult) -> dict:
    b = result.breakdown
    return {
        "x": result.x,
        "service_days": result.schedule.service_days,
        "gaps": list(result.gaps),
        "revenue": {
            "gross_revenue": b.gross_revenue,
            "service_cost": b.service_cost,
            "vom_cost": b.vom_cost,
            "net_revenue": b.net_revenue,
        },
        "step1_X": result.X,
        "theta": result.theta,
        "x_bounds": list(result.x_bounds),
        "step1_objective": result.step1_objective,
        "step2_objective": result.step2_objective,
        "status": result.status,
        "mip_gap": result.mip_gap,
        "nodes": result.nodes,
        "simultaneous_hours": list(result.dispatch.simultaneous_hours),
        "sweep": [
            {
                "x": r.x,
                "service_days": r.schedule.service_days,
                "revenue": r.breakdown.gross_revenue,
                "net_revenue": r.revenue,
                "service_cost": r.breakdown.service_cost,
                "vom_cost": r.breakdown.vom_cost,
            }
            for r in result.sweep
        ],
    }


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_sweep_csv(records, path) -> None:
    _write_csv(Path(path), ["x", "revenue", "net_revenue"],
               ([r.x, _fmt(r.breakdown.gross_revenue), _fmt(r.revenue)] for r in records))


def emit_report(result: PlanResult, out_dir) -> list[Path]:
    """Write plan.json, dispatch.csv, fade.csv and sweep.csv into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / n for n in ("plan.json", "dispatch.csv", "fade.csv", "sweep.csv")]

    paths[0].write_text(_json(plan_document(result)) + "\n")
    d = result.dispatch
    _write_csv(paths[1], ["t", "price", "P_c", "P_d", "SOC"],
               ([t, _fmt(p), _fmt(c), _fmt(dd), _fmt(s)] for t, (p, c, dd, s) in enumerate(
                   zip(result.prices, d.p_charge, d.p_discharge, d.soc), start=1)))
    f = result.fade
    _write_csv(paths[2], ["d", "q_cal", "q_cyc", "q", "b"],
               ([k, _fmt(a), _fmt(b), _fmt(c), bb] for k, (a, b, c, bb) in enumerate(
                   zip(f.q_cal, f.q_cyc, f.q, result.schedule.b), start=1)))
    write_sweep_csv(result.sweep, paths[3])
    return paths


def write_analytic_curve(curve, path) -> None:
    _write_csv(Path(path), ["x", "net_revenue"], ([x, _fmt(v)] for x, v in enumerate(curve)))
