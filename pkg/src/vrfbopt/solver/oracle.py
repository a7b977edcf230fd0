"""Exhaustive enumeration of service schedules for small horizons."""

from __future__ import annotations

import itertools
import math

from ..core import BatteryParams, Horizon, MarketSeries, ServiceSchedule, ValidationError
from ..model import FixedB, assemble
from .lp import SolveOptions, SolverError, solve_lp

MAX_ORACLE_DAYS = 12


def brute_force_oracle(params: BatteryParams, prices: MarketSeries, horizon: Horizon,
                       opts: SolveOptions | None = None, x_lo: int = 0,
                       x_hi: int | None = None) -> tuple[ServiceSchedule | None, float]:
    """Best schedule over every ``b`` with ``b(D) = 1`` and ``x_lo <= x <= x_hi``.

    Each candidate is scored by a fixed-schedule LP. Ties within ``abs_tol``
    go to fewer services, then to the earliest service days.
    """
    opts = opts or SolveOptions()
    D = horizon.n_days
    if D > MAX_ORACLE_DAYS:
        raise ValidationError(f"oracle refuses D={D}; enumeration is limited to {MAX_ORACLE_DAYS} days")
    x_hi = D - 1 if x_hi is None else x_hi
    scored = []
    for head in itertools.product((0, 1), repeat=D - 1):
        x = sum(head)
        if not x_lo <= x <= x_hi:
            continue
        sched = ServiceSchedule(head + (1,))
        res = solve_lp(assemble(params, prices, horizon, FixedB(sched)), opts)
        if res.status == "infeasible":
            continue
        if res.status != "optimal":
            raise SolverError(f"oracle LP for {sched.service_days} ended {res.status}")
        scored.append((res.objective, sched))
    if not scored:
        return None, -math.inf
    best = max(s[0] for s in scored)
    ties = [s for s in scored if s[0] >= best - opts.abs_tol]
    obj, sched = min(ties, key=lambda s: (s[1].x, s[1].service_days))
    return sched, obj


def count_schedules(D: int, x_lo: int = 0, x_hi: int | None = None) -> int:
    x_hi = D - 1 if x_hi is None else x_hi
    return sum(math.comb(D - 1, k) for k in range(x_lo, x_hi + 1))
