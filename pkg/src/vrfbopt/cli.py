"""Command-line entry point: ``vrfbopt <command> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analytic
from .core import Horizon, MarketSeries, ValidationError
from .io import (RunConfig, emit_report, load_config, load_prices, write_analytic_curve,
                 write_sweep_csv)
from .model import FreeB, assemble
from .scheduler import run_algorithm1, step1_sweep
from .solver import SolverError, brute_force_oracle, solve_milp

log = logging.getLogger("vrfbopt")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        sys.stderr.write(json.dumps({"error": "usage", "message": message}) + "\n")
        sys.exit(2)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value run configuration file")
    p.add_argument("--prices", help="hourly price CSV (timestamp,price_usd_per_mwh)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--theta", type=int, help="half-width of the step-2 service-count window")
    p.add_argument("--solver-cmd", help="external solver command with {lp} and {sol} placeholders")
    p.add_argument("--workers", type=int, help="concurrent LP solves in the step-1 sweep")
    p.add_argument("--lp-engine", choices=["auto", "simplex", "highs"])
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vrfbopt", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analytic", help="closed-form net revenue curve")
    p.add_argument("--r", type=float, required=True, help="daily revenue at full capacity ($)")
    p.add_argument("--q", type=float, required=True, help="restorable fade over the period (p.u.)")
    p.add_argument("--d", type=float, required=True, help="period length (days)")
    p.add_argument("--k", type=float, required=True, help="cost per service ($)")
    p.add_argument("--x-max", type=int, default=20, help="last x written to the curve")
    _common(p)

    for name, text in [("sweep", "step 1 only"), ("plan", "full two-step optimisation"),
                       ("validate", "check config and prices")]:
        _common(sub.add_parser(name, help=text))

    p = sub.add_parser("oracle-check", help="compare branch and bound with enumeration")
    p.add_argument("--days", type=int, default=4)
    p.add_argument("--hours", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    _common(p)
    return parser


def _config(args) -> RunConfig:
    cfg = load_config(args.config)
    solver = cfg.solver
    if args.solver_cmd:
        solver = replace(solver, backend="external", solver_cmd=args.solver_cmd)
    if args.workers is not None:
        solver = replace(solver, workers=args.workers)
    if args.lp_engine:
        solver = replace(solver, lp_engine=args.lp_engine)
    cfg.solver = solver
    if args.theta is not None:
        if args.theta < 0:
            raise UsageError("--theta must be >= 0")
        cfg.theta = args.theta
    if args.prices:
        cfg.prices = args.prices
    if args.out:
        cfg.out = args.out
    return cfg


def _inputs(cfg: RunConfig):
    if not cfg.prices:
        raise UsageError("--prices (or the 'prices' config key) is required")
    series = load_prices(cfg.prices, cfg.hours_per_day, cfg.n_days)
    horizon = cfg.horizon(len(series))
    series.check_horizon(horizon)
    return series, horizon


def cmd_analytic(args, cfg) -> int:
    inp = analytic.AnalyticInputs(r=args.r, Q=args.q, D=args.d, K=args.k)
    x_star, net = analytic.optimal_service_count(inp)
    out = Path(cfg.out) if cfg.out else Path("analytic.csv")
    if out.suffix != ".csv":
        out.mkdir(parents=True, exist_ok=True)
        out = out / "analytic.csv"
    write_analytic_curve(analytic.net_revenue_curve(inp, args.x_max), out)
    print(f"x_star={x_star} net_revenue={net:.6f} curve={out}")
    return 0


def cmd_sweep(args, cfg) -> int:
    series, horizon = _inputs(cfg)
    X, records = step1_sweep(cfg.params, series, horizon, cfg.solver)
    out = Path(cfg.out or "results")
    out.mkdir(parents=True, exist_ok=True)
    write_sweep_csv(records, out / "sweep.csv")
    print(f"X={X} counts_solved={len(records)} sweep={out / 'sweep.csv'}")
    return 0


def cmd_plan(args, cfg) -> int:
    series, horizon = _inputs(cfg)
    result = run_algorithm1(cfg.params, series, horizon, cfg.theta, cfg.solver, big_m=cfg.big_m)
    paths = emit_report(result, cfg.out or "results")
    print(f"x={result.x} service_days={result.schedule.service_days} "
          f"net_revenue={result.breakdown.net_revenue:.6f} out={paths[0].parent}")
    return 0


def cmd_validate(args, cfg) -> int:
    series, horizon = _inputs(cfg)
    print(json.dumps({
        "n_days": horizon.n_days, "hours_per_day": horizon.hours_per_day,
        "n_hours": horizon.n_hours, "start": series.start.isoformat() if series.start else None,
        "price_min": float(series.prices.min()), "price_max": float(series.prices.max()),
        "service_cost": cfg.params.service_cost, "theta": cfg.theta,
    }))
    return 0


def cmd_oracle_check(args, cfg) -> int:
    if cfg.prices:
        series, horizon = _inputs(cfg)
    else:
        if args.days < 1 or args.hours < 1:
            raise UsageError("--days and --hours must be >= 1")
        rng = np.random.default_rng(args.seed)
        horizon = Horizon(args.days, args.hours)
        series = MarketSeries(rng.uniform(0.0, 100.0, horizon.n_hours))
    D = horizon.n_days
    inst = assemble(cfg.params, series, horizon, FreeB(0, D - 1), big_m=cfg.big_m)
    res = solve_milp(inst, cfg.solver)
    sched, oracle_obj = brute_force_oracle(cfg.params, series, horizon, cfg.solver)
    match = abs(res.objective - oracle_obj) <= 1e-6
    print(json.dumps({"milp": res.objective, "oracle": oracle_obj,
                      "oracle_service_days": sched.service_days if sched else None,
                      "nodes": res.nodes, "match": match}))
    return 0 if match else 1


COMMANDS = {
    "analytic": cmd_analytic, "sweep": cmd_sweep, "plan": cmd_plan,
    "validate": cmd_validate, "oracle-check": cmd_oracle_check,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
        return COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        sys.stderr.write(json.dumps({"error": "usage", "message": str(exc)}) + "\n")
        return 2
    except (ValidationError, SolverError, OSError) as exc:
        kind = type(exc).__name__
        sys.stderr.write(json.dumps({"error": kind, "message": str(exc)}) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
