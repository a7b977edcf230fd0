"""Shared domain types and calendar indexing.

Hours, days and years are all 1-based except the year index, which is
zero-based so that the first year of the horizon is undiscounted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime
from typing import Sequence

import numpy as np


class ValidationError(ValueError):
    """Raised when user-supplied values violate a documented bound."""


@dataclass(frozen=True)
class BatteryParams:
    """Ratings, efficiencies and degradation constants of the flow battery.

    ``calendar_life`` is expressed in days and ``cycle_life`` in equivalent
    full cycles. ``restore_divisor`` switches the restoration term to the
    literal ``1 - sigma * b / L_cyc`` reading; off by default.
    """

    rated_power: float = 0.25
    rated_capacity: float = 1.0
    eff_charge: float = 0.897
    eff_discharge: float = 0.786
    vom_cost: float = 0.3
    calendar_life: float = 3650.0
    cycle_life: float = 20000.0
    eol: float = 0.3
    rho_split: float = 0.5
    sigma_restore: float = 1.0
    service_cost: float = 500.0
    discount_rate: float = 0.07
    soc_init: float = 0.0
    restore_divisor: bool = False

    @property
    def calendar_increment(self) -> float:
        """Daily calendar fade in p.u."""
        return self.rho_split * self.eol / self.calendar_life

    @property
    def cycle_increment_per_mwh(self) -> float:
        """Cycle fade in p.u. per MWh discharged from the tank."""
        return (1.0 - self.rho_split) * self.eol / (self.rated_capacity * self.cycle_life)

    @property
    def restore_fraction(self) -> float:
        if self.restore_divisor:
            return self.sigma_restore / self.cycle_life
        return self.sigma_restore


@dataclass(frozen=True)
class Horizon:
    n_days: int
    hours_per_day: int = 24
    days_per_year: int = 365

    def __post_init__(self):
        if self.n_days < 1:
            raise ValidationError("n_days must be >= 1")
        if self.hours_per_day < 1:
            raise ValidationError("hours_per_day must be >= 1")
        if self.days_per_year < 1:
            raise ValidationError("days_per_year must be >= 1")

    @property
    def n_hours(self) -> int:
        return self.n_days * self.hours_per_day

    @property
    def n_years(self) -> int:
        return year_of_day(self.n_days, self) + 1

    def hours_of_day(self, d: int) -> range:
        """1-based hour indices belonging to day ``d``."""
        if not 1 <= d <= self.n_days:
            raise ValidationError(f"day {d} outside 1..{self.n_days}")
        start = (d - 1) * self.hours_per_day + 1
        return range(start, start + self.hours_per_day)


def day_of_hour(t: int, horizon: Horizon) -> int:
    if not 1 <= t <= horizon.n_hours:
        raise ValidationError(f"hour {t} outside 1..{horizon.n_hours}")
    return (t - 1) // horizon.hours_per_day + 1


def year_of_day(d: int, horizon: Horizon) -> int:
    if not 1 <= d <= horizon.n_days:
        raise ValidationError(f"day {d} outside 1..{horizon.n_days}")
    return (d - 1) // horizon.days_per_year


def validate_params(params: BatteryParams, horizon: Horizon | None = None) -> BatteryParams:
    """Return ``params`` unchanged, or raise listing every violated bound."""
    p = params
    problems = []

    def need(ok, msg):
        if not ok:
            problems.append(msg)

    values = [p.rated_power, p.rated_capacity, p.eff_charge, p.eff_discharge, p.vom_cost,
              p.calendar_life, p.cycle_life, p.eol, p.rho_split, p.sigma_restore,
              p.service_cost, p.discount_rate, p.soc_init]
    if not all(math.isfinite(v) for v in values):
        raise ValidationError("battery parameters must be finite numbers")

    need(p.eff_charge > 0, "eff_charge must be > 0")
    need(p.eff_charge <= 1, "eff_charge must be <= 1")
    need(p.eff_discharge > 0, "eff_discharge must be > 0")
    need(p.eff_discharge <= 1, "eff_discharge must be <= 1")
    need(p.rated_power > 0, "rated_power must be > 0")
    need(p.rated_capacity > 0, "rated_capacity must be > 0")
    need(p.eol > 0, "eol must be > 0")
    need(p.eol < 1, "eol must be < 1")
    need(0 <= p.rho_split <= 1, "rho_split must be within [0, 1]")
    need(0 <= p.sigma_restore <= 1, "sigma_restore must be within [0, 1]")
    need(p.calendar_life >= 1, "calendar_life must be >= 1")
    need(p.cycle_life >= 1, "cycle_life must be >= 1")
    need(p.service_cost >= 0, "service_cost must be >= 0")
    need(p.discount_rate >= 0, "discount_rate must be >= 0")
    need(p.vom_cost >= 0, "vom_cost must be >= 0")
    need(0 <= p.soc_init <= p.rated_capacity, "soc_init must be within [0, rated_capacity]")
    if problems:
        raise ValidationError("; ".join(problems))
    return params


@dataclass(frozen=True)
class MarketSeries:
    """Hourly day-ahead prices in $/MWh. Negative prices are allowed."""

    prices: np.ndarray
    start: datetime | None = None

    def __post_init__(self):
        arr = np.asarray(self.prices, dtype=float).copy()
        if arr.ndim != 1:
            raise ValidationError("prices must be one-dimensional")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("prices must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "prices", arr)

    def __len__(self):
        return len(self.prices)

    def check_horizon(self, horizon: Horizon) -> None:
        if len(self.prices) != horizon.n_hours:
            raise ValidationError(
                f"price series length mismatch: {len(self.prices)} prices for "
                f"{horizon.n_hours} hours")


@dataclass(frozen=True)
class ServiceSchedule:
    """Binary service-day vector ``b`` with the final day always serviced."""

    b: tuple

    def __post_init__(self):
        b = tuple(int(round(v)) for v in self.b)
        if not b:
            raise ValidationError("schedule must cover at least one day")
        if any(v not in (0, 1) for v in b):
            raise ValidationError("schedule entries must be 0 or 1")
        if b[-1] != 1:
            raise ValidationError("the final day must carry a service")
        object.__setattr__(self, "b", b)

    @classmethod
    def from_days(cls, days: Sequence[int], n_days: int) -> "ServiceSchedule":
        b = [0] * n_days
        for d in days:
            if not 1 <= d <= n_days:
                raise ValidationError(f"service day {d} outside 1..{n_days}")
            b[d - 1] = 1
        return cls(tuple(b))

    @property
    def n_days(self) -> int:
        return len(self.b)

    @property
    def x(self) -> int:
        """Number of services in addition to the mandatory final one."""
        return sum(self.b) - 1

    @property
    def service_days(self) -> list[int]:
        return [d for d, v in enumerate(self.b, start=1) if v]

    @property
    def gaps(self) -> list[int]:
        """Days between consecutive services, the first counted from day 0."""
        days = self.service_days
        return [d - p for p, d in zip([0] + days[:-1], days)]


@dataclass(frozen=True)
class FadeTrajectory:
    q: np.ndarray
    q_cal: np.ndarray
    q_cyc: np.ndarray

    def check(self, eol: float, tol: float = 1e-9) -> None:
        if abs(self.q[0]) > tol:
            raise ValidationError("q(1) must be 0")
        if np.max(np.abs(self.q[1:] - self.q_cal[1:] - self.q_cyc[1:]), initial=0.0) > tol:
            raise ValidationError("q must equal q_cal + q_cyc")
        if min(self.q.min(), self.q_cal.min(), self.q_cyc.min()) < -tol:
            raise ValidationError("fade components must be non-negative")
        if self.q.max() > eol + tol:
            raise ValidationError("fade exceeds end-of-life")


@dataclass(frozen=True)
class DispatchSolution:
    p_charge: np.ndarray
    p_discharge: np.ndarray
    e_purchased: np.ndarray
    e_sold: np.ndarray
    soc: np.ndarray
    objective: float
    simultaneous_hours: list = field(default_factory=list)
