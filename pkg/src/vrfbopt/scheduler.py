"""Two-step search for the number and timing of rebalancing services.

Step one sweeps the extra-service count ``x = 0, 1, ...`` with evenly
spaced services and stops at the first count that does not improve the
objective. Step two re-optimises count and timing jointly with ``x``
restricted to a window of half-width ``theta`` around the step-one optimum.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import (BatteryParams, DispatchSolution, FadeTrajectory, Horizon, MarketSeries,
                   ServiceSchedule, ValidationError)
from .model import FixedB, FreeB, ProblemInstance, assemble, simulate_fade
from .solver import SolveOptions, SolverError, solve_lp, solve_milp

log = logging.getLogger(__name__)

IMPROVE_TOL = 1e-6
SIMULTANEOUS_TOL = 1e-6


@dataclass(frozen=True)
class RevenueBreakdown:
    gross_revenue: float  # discounted arbitrage revenue
    service_cost: float
    vom_cost: float
    net_revenue: float


@dataclass(frozen=True)
class SweepRecord:
    x: int
    schedule: ServiceSchedule
    revenue: float
    breakdown: RevenueBreakdown
    values: np.ndarray = field(repr=False, compare=False, default=None)


@dataclass
class PlanResult:
    x: int
    schedule: ServiceSchedule
    dispatch: DispatchSolution
    fade: FadeTrajectory
    breakdown: RevenueBreakdown
    gaps: list
    sweep: list
    X: int
    theta: int
    x_bounds: tuple
    step1_objective: float
    step2_objective: float
    prices: np.ndarray = field(default=None, repr=False)
    nodes: int = 0
    mip_gap: float = 0.0
    status: str = "optimal"


def periodic_schedule(x: int, D: int) -> ServiceSchedule:
    """Services every ``floor(D/(x+1))`` days; the last one always lands on day D."""
    if x < 0:
        raise ValidationError("x must be >= 0")
    if x >= D:
        raise ValidationError(f"cannot fit {x + 1} services into {D} days")
    n = D // (x + 1)
    days = [i * n for i in range(1, x + 1)] + [D]
    return ServiceSchedule.from_days(days, D)


def revenue_breakdown(instance: ProblemInstance, values: np.ndarray) -> RevenueBreakdown:
    r = instance.roles
    c = instance.c
    gross = float(c[r["Es"]] @ values[r["Es"]] + c[r["Ep"]] @ values[r["Ep"]])
    service = float(-c[r["b"]] @ values[r["b"]])
    vom = float(-(c[r["Pc"]] @ values[r["Pc"]] + c[r["Pd"]] @ values[r["Pd"]]))
    return RevenueBreakdown(gross, service, vom, gross - service - vom)


def schedule_from_values(instance: ProblemInstance, values: np.ndarray) -> ServiceSchedule:
    b = np.round(values[instance.roles["b"]]).astype(int)
    return ServiceSchedule(tuple(b.tolist()))


def extract_dispatch(instance: ProblemInstance, values: np.ndarray,
                     objective: float) -> DispatchSolution:
    r = instance.roles
    pc, pd = values[r["Pc"]].copy(), values[r["Pd"]].copy()
    both = np.flatnonzero((pc > SIMULTANEOUS_TOL) & (pd > SIMULTANEOUS_TOL)) + 1
    if len(both):
        log.warning("simultaneous charge and discharge in %d hour(s), first at t=%d",
                    len(both), both[0])
    return DispatchSolution(
        p_charge=pc, p_discharge=pd, e_purchased=values[r["Ep"]].copy(),
        e_sold=values[r["Es"]].copy(), soc=values[r["SOC"]].copy(),
        objective=objective, simultaneous_hours=both.tolist())


def extract_fade(params: BatteryParams, horizon: Horizon, instance: ProblemInstance,
                 values: np.ndarray, schedule: ServiceSchedule) -> FadeTrajectory:
    """Fade recomputed by forward recursion from the solved dispatch.

    The recursion is exact; the LP's own fade columns agree with it up to
    solver tolerance, which is checked here.
    """
    pd = values[instance.roles["Pd"]]
    q, q_cal, q_cyc = simulate_fade(params, horizon, pd, schedule.b)
    lp_q = values[instance.roles["q"]]
    if np.max(np.abs(lp_q - q)) > 1e-6:
        raise SolverError("solver fade trajectory disagrees with the recursion")
    fade = FadeTrajectory(q=q, q_cal=q_cal, q_cyc=q_cyc)
    fade.check(params.eol, tol=1e-7)
    return fade


def _solve_fixed(params, prices, horizon, opts, x):
    sched = periodic_schedule(x, horizon.n_days)
    inst = assemble(params, prices, horizon, FixedB(sched))
    res = solve_lp(inst, opts)
    if res.status != "optimal":
        raise SolverError(f"step-1 LP for x={x} ended {res.status}")
    return SweepRecord(x=x, schedule=sched, revenue=res.objective,
                       breakdown=revenue_breakdown(inst, res.values), values=res.values)


def step1_sweep(params: BatteryParams, prices: MarketSeries, horizon: Horizon,
                opts: SolveOptions | None = None) -> tuple[int, list[SweepRecord]]:
    """Ascending sweep over periodic schedules; returns ``(X, records)``.

    Counts are solved ``opts.workers`` at a time, but records are consumed in
    order of ``x`` and truncated at the first non-improving count, so the
    output does not depend on the worker count.
    """
    opts = opts or SolveOptions()
    D = horizon.n_days
    records: list[SweepRecord] = []
    prev = 0.0  # the loop starts from R = 0
    x = 0
    with ThreadPoolExecutor(max_workers=opts.workers) as pool:
        while x < D:
            batch = list(range(x, min(x + opts.workers, D)))

            def run(k):
                try:
                    return _solve_fixed(params, prices, horizon, opts, k)
                except SolverError as exc:
                    raise SolverError(f"x={k}: {exc}") from exc

            for rec in pool.map(run, batch):
                records.append(rec)
                if not rec.revenue > prev + IMPROVE_TOL:
                    return _argmax(records), records
                prev = rec.revenue
            x = batch[-1] + 1
    return _argmax(records), records


def _argmax(records) -> int:
    best = max(r.revenue for r in records)
    return next(r.x for r in records if r.revenue >= best - IMPROVE_TOL)


def step2_optimize(params: BatteryParams, prices: MarketSeries, horizon: Horizon, X: int,
                   theta: int = 2, opts: SolveOptions | None = None,
                   sweep: list[SweepRecord] | None = None, big_m: str = "tight") -> PlanResult:
    opts = opts or SolveOptions()
    if theta < 0:
        raise ValidationError("theta must be >= 0")
    D = horizon.n_days
    lo, hi = max(0, X - theta), min(D - 1, X + theta)
    inst = assemble(params, prices, horizon, FreeB(lo, hi), big_m=big_m)
    sweep = sweep or []
    seeds = [r for r in sweep if lo <= r.x <= hi and r.values is not None]
    seed = max(seeds, key=lambda r: r.revenue).values if seeds else None
    res = solve_milp(inst, opts, incumbent=seed if opts.backend == "builtin" else None)
    if res.values is None:
        raise SolverError(f"step-2 MILP ended {res.status} for x in [{lo}, {hi}]")
    step1_best = max((r.revenue for r in sweep), default=-math.inf)
    if res.status == "optimal" and res.objective < step1_best - IMPROVE_TOL:
        raise SolverError(
            f"step-2 objective {res.objective:.6f} below step-1 best {step1_best:.6f}")
    schedule = schedule_from_values(inst, res.values)
    return PlanResult(
        x=schedule.x, schedule=schedule,
        dispatch=extract_dispatch(inst, res.values, res.objective),
        fade=extract_fade(params, horizon, inst, res.values, schedule),
        breakdown=revenue_breakdown(inst, res.values), gaps=schedule.gaps, sweep=sweep,
        X=X, theta=theta, x_bounds=(lo, hi), step1_objective=step1_best,
        step2_objective=res.objective, prices=prices.prices, nodes=res.nodes, mip_gap=res.gap, status=res.status)


def run_algorithm1(params: BatteryParams, prices: MarketSeries, horizon: Horizon,
                   theta: int = 2, opts: SolveOptions | None = None,
                   big_m: str = "tight") -> PlanResult:
    opts = opts or SolveOptions()
    X, records = step1_sweep(params, prices, horizon, opts)
    log.info("step 1 settled on X=%d after %d counts", X, len(records))
    return step2_optimize(params, prices, horizon, X, theta, opts, sweep=records, big_m=big_m)
