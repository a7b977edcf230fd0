"""Linear model of hourly arbitrage coupled to daily capacity fade.

Variables are laid out hour by hour (``Es, Ep, Pc, Pd, SOC``), then day by
day (``qcal, qcyc, q, b, z``), then the extra-service count ``x``. The
objective is maximised. ``z(d)`` stands in for ``b(d) * qcyc(d-1)`` through
the four-inequality binary product construction with bound ``EOL``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np
import scipy.sparse as sp

from .core import BatteryParams, Horizon, MarketSeries, ServiceSchedule, ValidationError, validate_params

HOUR_ROLES = ("Es", "Ep", "Pc", "Pd", "SOC")
DAY_ROLES = ("qcal", "qcyc", "q", "b", "z")
SENSES = ("<=", "=", ">=")


@dataclass(frozen=True)
class FixedB:
    schedule: ServiceSchedule


@dataclass(frozen=True)
class FreeB:
    x_lo: int
    x_hi: int

    def __post_init__(self):
        if self.x_lo < 0 or self.x_lo > self.x_hi:
            raise ValidationError(f"invalid service-count bounds [{self.x_lo}, {self.x_hi}]")


BuildMode = Union[FixedB, FreeB]


class Layout:
    """Deterministic variable indexing for a horizon."""

    def __init__(self, horizon: Horizon):
        self.horizon = horizon
        self.T = horizon.n_hours
        self.D = horizon.n_days
        self._day0 = 5 * self.T
        self.n_vars = 5 * self.T + 5 * self.D + 1

    def hour(self, role: str, t: int) -> int:
        return 5 * (t - 1) + HOUR_ROLES.index(role)

    def day(self, role: str, d: int) -> int:
        return self._day0 + 5 * (d - 1) + DAY_ROLES.index(role)

    @property
    def x(self) -> int:
        return self.n_vars - 1

    def hour_indices(self, role: str) -> np.ndarray:
        return np.arange(self.T) * 5 + HOUR_ROLES.index(role)

    def day_indices(self, role: str) -> np.ndarray:
        return self._day0 + np.arange(self.D) * 5 + DAY_ROLES.index(role)

    def names(self) -> list[str]:
        out = []
        for t in range(1, self.T + 1):
            out.extend(f"{r}_t{t:04d}" for r in HOUR_ROLES)
        for d in range(1, self.D + 1):
            out.extend(f"{r}_d{d:03d}" for r in DAY_ROLES)
        out.append("x")
        return out


@dataclass
class Rows:
    """Constraint rows as sparse triplets plus per-variable bound overrides."""

    coefs: list = field(default_factory=list)  # one {var: coef} dict per row
    senses: list = field(default_factory=list)
    rhs: list = field(default_factory=list)
    names: list = field(default_factory=list)
    bounds: dict = field(default_factory=dict)

    def add(self, name, coefs, sense, rhs):
        assert sense in SENSES
        self.coefs.append(coefs)
        self.senses.append(sense)
        self.rhs.append(float(rhs))
        self.names.append(name)

    def extend(self, other: "Rows"):
        self.coefs += other.coefs
        self.senses += other.senses
        self.rhs += other.rhs
        self.names += other.names
        self.bounds.update(other.bounds)

    def __len__(self):
        return len(self.coefs)


@dataclass(frozen=True)
class ProblemInstance:
    """An assembled maximisation LP/MILP. Treat as immutable."""

    names: tuple
    lb: np.ndarray
    ub: np.ndarray
    integer: np.ndarray
    c: np.ndarray
    A: sp.csr_matrix
    senses: tuple
    rhs: np.ndarray
    row_names: tuple
    roles: dict = field(default_factory=dict)
    horizon: Horizon | None = None

    def __post_init__(self):
        n = len(self.names)
        if not (len(self.lb) == len(self.ub) == len(self.integer) == len(self.c) == n):
            raise ValidationError("variable table columns disagree in length")
        if self.A.shape != (len(self.rhs), n):
            raise ValidationError("constraint matrix references undeclared variables")
        if np.any(self.lb > self.ub):
            bad = int(np.flatnonzero(self.lb > self.ub)[0])
            raise ValidationError(f"bounds of {self.names[bad]} satisfy lb > ub")

    @property
    def n_vars(self) -> int:
        return len(self.names)

    @property
    def n_rows(self) -> int:
        return len(self.rhs)

    @property
    def is_mip(self) -> bool:
        return bool(self.integer.any())

    def index(self, name: str) -> int:
        try:
            return self._name_index[name]
        except AttributeError:
            object.__setattr__(self, "_name_index", {n: i for i, n in enumerate(self.names)})
            return self._name_index[name]
        except KeyError:
            raise KeyError(f"unknown variable {name!r}") from None

    def row_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        s = np.asarray(self.senses)
        lo = np.where(s == "<=", -np.inf, self.rhs)
        hi = np.where(s == ">=", np.inf, self.rhs)
        return lo, hi

    def with_bounds(self, idx, lb, ub) -> "ProblemInstance":
        new_lb, new_ub = self.lb.copy(), self.ub.copy()
        new_lb[idx] = lb
        new_ub[idx] = ub
        return replace(self, lb=new_lb, ub=new_ub)

    def relaxed(self) -> "ProblemInstance":
        return replace(self, integer=np.zeros(self.n_vars, dtype=bool))

    def objective_value(self, values) -> float:
        return float(self.c @ np.asarray(values, dtype=float))

    def max_violation(self, values) -> float:
        """Largest bound or row violation of an assignment."""
        v = np.asarray(values, dtype=float)
        lo, hi = self.row_bounds()
        act = self.A @ v
        worst = max(
            np.max(self.lb - v, initial=0.0),
            np.max(v - self.ub, initial=0.0),
            np.max(lo - act, initial=0.0),
            np.max(act - hi, initial=0.0),
        )
        ints = self.integer
        if ints.any():
            worst = max(worst, float(np.max(np.abs(v[ints] - np.round(v[ints])))))
        return float(worst)


def _discount_factors(params: BatteryParams, horizon: Horizon) -> np.ndarray:
    """Per-hour factor ``1/(1+alpha)^y`` with zero-based year index ``y``."""
    hours = np.arange(horizon.n_hours)
    years = (hours // horizon.hours_per_day) // horizon.days_per_year
    return 1.0 / (1.0 + params.discount_rate) ** years


def build_objective(params: BatteryParams, prices: MarketSeries, horizon: Horizon) -> np.ndarray:
    """Objective coefficients (maximise). Service and VOM costs are not discounted."""
    prices.check_horizon(horizon)
    if len(prices) == 0:
        raise ValidationError("price series length mismatch: empty series")
    lay = Layout(horizon)
    c = np.zeros(lay.n_vars)
    disc = prices.prices * _discount_factors(params, horizon)
    c[lay.hour_indices("Es")] = disc
    c[lay.hour_indices("Ep")] = -disc
    c[lay.hour_indices("Pc")] = -params.vom_cost
    c[lay.hour_indices("Pd")] = -params.vom_cost
    # K*(x+1) written as K * sum(b)
    c[lay.day_indices("b")] = -params.service_cost
    return c


def build_service_constraints(mode: BuildMode, horizon: Horizon) -> Rows:
    lay = Layout(horizon)
    D = horizon.n_days
    rows = Rows()
    if isinstance(mode, FixedB):
        sched = mode.schedule
        if sched.n_days != D:
            raise ValidationError(f"schedule covers {sched.n_days} days, horizon has {D}")
        for d, v in enumerate(sched.b, start=1):
            rows.bounds[lay.day("b", d)] = (float(v), float(v))
        rows.bounds[lay.x] = (float(sched.x), float(sched.x))
    else:
        if mode.x_hi + 1 > D:
            raise ValidationError(
                f"cannot place {mode.x_hi + 1} services in {D} days (x_hi must be <= {D - 1})")
        rows.bounds[lay.x] = (float(mode.x_lo), float(mode.x_hi))
    coefs = {lay.day("b", d): 1.0 for d in range(1, D + 1)}
    coefs[lay.x] = -1.0
    rows.add("service_count", coefs, "=", 1.0)
    rows.add("final_service", {lay.day("b", D): 1.0}, "=", 1.0)
    return rows


def cycle_fade_bounds(params: BatteryParams, horizon: Horizon) -> np.ndarray:
    """Valid upper bounds on ``qcyc(d)`` for ``d = 1..D``.

    Cycle fade grows by at most one day of full-power discharge per day and
    can never exceed ``(1 - rho) * EOL`` because of the lifetime cycle budget.
    """
    day_max = params.cycle_increment_per_mwh * params.rated_power * horizon.hours_per_day
    grow = np.arange(horizon.n_days) * day_max
    return np.minimum(grow, (1.0 - params.rho_split) * params.eol)


def build_degradation_constraints(params: BatteryParams, mode: BuildMode, horizon: Horizon,
                                  big_m: str = "tight") -> Rows:
    """Fade recursion rows.

    ``big_m="eol"`` uses ``EOL`` as the bound in the product linearization;
    ``"tight"`` uses the per-day bounds of ``cycle_fade_bounds``, which gives
    the same integer solutions with a much stronger relaxation.
    """
    if big_m not in ("tight", "eol"):
        raise ValidationError(f"unknown big_m rule {big_m!r}")
    lay = Layout(horizon)
    eol = params.eol
    bounds = cycle_fade_bounds(params, horizon) if big_m == "tight" else None
    cal_inc = params.calendar_increment
    cyc_coef = params.cycle_increment_per_mwh
    sigma = params.restore_fraction
    rows = Rows()
    rows.add("fade_init", {lay.day("q", 1): 1.0}, "=", 0.0)
    rows.add("qcal_init", {lay.day("qcal", 1): 1.0}, "=", 0.0)
    rows.add("qcyc_init", {lay.day("qcyc", 1): 1.0}, "=", 0.0)
    rows.bounds[lay.day("z", 1)] = (0.0, 0.0)
    for d in range(2, horizon.n_days + 1):
        q, qcal, qcyc = lay.day("q", d), lay.day("qcal", d), lay.day("qcyc", d)
        prev_cal, prev_cyc = lay.day("qcal", d - 1), lay.day("qcyc", d - 1)
        z, b = lay.day("z", d), lay.day("b", d)
        rows.add(f"fade_sum_d{d:03d}", {q: 1.0, qcal: -1.0, qcyc: -1.0}, "=", 0.0)
        rows.add(f"fade_cal_d{d:03d}", {qcal: 1.0, prev_cal: -1.0}, "=", cal_inc)
        cyc = {qcyc: 1.0, prev_cyc: -1.0, z: sigma}
        for t in horizon.hours_of_day(d):
            cyc[lay.hour("Pd", t)] = -cyc_coef
        rows.add(f"fade_cyc_d{d:03d}", cyc, "=", 0.0)
        m = eol if bounds is None else float(bounds[d - 2])
        rows.add(f"lin_b_d{d:03d}", {z: 1.0, b: -m}, "<=", 0.0)
        rows.add(f"lin_q_d{d:03d}", {z: 1.0, prev_cyc: -1.0}, "<=", 0.0)
        rows.add(f"lin_bq_d{d:03d}", {z: 1.0, prev_cyc: -1.0, b: -m}, ">=", -m)
    return rows


def build_capacity_limits(params: BatteryParams, horizon: Horizon) -> Rows:
    lay = Layout(horizon)
    rows = Rows()
    coef = 1.0 / params.rated_capacity
    rows.add("cycle_budget", {int(i): coef for i in lay.hour_indices("Pd")}, "<=", params.cycle_life)
    for d in range(1, horizon.n_days + 1):
        rows.add(f"eol_d{d:03d}", {lay.day("q", d): 1.0}, "<=", params.eol)
    return rows


def build_soc_power_constraints(params: BatteryParams, horizon: Horizon) -> Rows:
    """Hourly energy accounting with the previous day's fade derating capacity."""
    lay = Layout(horizon)
    cap = params.rated_capacity
    rows = Rows()
    for t in range(1, lay.T + 1):
        es, ep = lay.hour("Es", t), lay.hour("Ep", t)
        pc, pd, soc = lay.hour("Pc", t), lay.hour("Pd", t), lay.hour("SOC", t)
        rows.add(f"buy_t{t:04d}", {ep: 1.0, pc: -1.0}, "=", 0.0)
        rows.add(f"sell_t{t:04d}", {es: 1.0, pd: -params.eff_discharge}, "=", 0.0)
        bal = {soc: 1.0, pc: -params.eff_charge, pd: 1.0}
        if t == 1:
            rows.add(f"soc_t{t:04d}", bal, "=", params.soc_init)
        else:
            bal[lay.hour("SOC", t - 1)] = -1.0
            rows.add(f"soc_t{t:04d}", bal, "=", 0.0)
        d = (t - 1) // horizon.hours_per_day + 1
        capr = {soc: 1.0}
        if d >= 2:
            capr[lay.day("q", d - 1)] = cap
        rows.add(f"cap_t{t:04d}", capr, "<=", cap)
        rows.bounds[pc] = (0.0, params.rated_power)
        rows.bounds[pd] = (0.0, params.rated_power)
    return rows


def assemble(params: BatteryParams, prices: MarketSeries, horizon: Horizon,
             mode: BuildMode, big_m: str = "tight") -> ProblemInstance:
    validate_params(params, horizon)
    c = build_objective(params, prices, horizon)
    rows = Rows()
    rows.extend(build_soc_power_constraints(params, horizon))
    rows.extend(build_degradation_constraints(params, mode, horizon, big_m))
    rows.extend(build_capacity_limits(params, horizon))
    rows.extend(build_service_constraints(mode, horizon))

    lay = Layout(horizon)
    n = lay.n_vars
    lb = np.zeros(n)
    ub = np.full(n, np.inf)
    ub[lay.day_indices("b")] = 1.0
    for i, (lo, hi) in rows.bounds.items():
        lb[i], ub[i] = lo, hi
    integer = np.zeros(n, dtype=bool)
    if isinstance(mode, FreeB):
        integer[lay.day_indices("b")] = True

    indptr, indices, data = [0], [], []
    for coefs in rows.coefs:
        for j in sorted(coefs):
            indices.append(j)
            data.append(coefs[j])
        indptr.append(len(indices))
    A = sp.csr_matrix((np.array(data, dtype=float), np.array(indices, dtype=np.int64),
                       np.array(indptr, dtype=np.int64)), shape=(len(rows), n))

    roles = {r: lay.hour_indices(r) for r in HOUR_ROLES}
    roles.update({r: lay.day_indices(r) for r in DAY_ROLES})
    roles["x"] = np.array([lay.x])
    return ProblemInstance(
        names=tuple(lay.names()), lb=lb, ub=ub, integer=integer, c=c, A=A,
        senses=tuple(rows.senses), rhs=np.array(rows.rhs), row_names=tuple(rows.names),
        roles=roles, horizon=horizon,
    )


def simulate_fade(params: BatteryParams, horizon: Horizon, p_discharge, b) -> tuple:
    """Forward recursion of the daily fade for a given dispatch and schedule.

    Returns ``(q, q_cal, q_cyc)`` arrays of length ``D``.
    """
    D = horizon.n_days
    pd = np.asarray(p_discharge, dtype=float).reshape(D, horizon.hours_per_day)
    daily = pd.sum(axis=1)
    sigma = params.restore_fraction
    q_cal = np.zeros(D)
    q_cyc = np.zeros(D)
    for i in range(1, D):
        q_cal[i] = q_cal[i - 1] + params.calendar_increment
        q_cyc[i] = (q_cyc[i - 1] * (1.0 - sigma * b[i])
                    + params.cycle_increment_per_mwh * daily[i])
    q = q_cal + q_cyc
    return q, q_cal, q_cyc
