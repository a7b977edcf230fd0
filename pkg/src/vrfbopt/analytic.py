"""Closed-form service-count model under equal daily revenue and linear fade.

With ``S = r*Q*D/2`` the revenue lost without intermediate services, the
net value of ``x`` extra services is ``S*x/(x+1) - K*(x+1)`` for ``x >= 1``
and ``-K`` at ``x = 0``. The expression is concave in ``x``, so its integer
maximiser sits next to the stationary point ``sqrt(S/K) - 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ValidationError


@dataclass(frozen=True)
class AnalyticInputs:
    r: float  # daily arbitrage revenue at full capacity, $/day
    Q: float  # restorable fade over the period, p.u.
    D: float  # period length, days
    K: float  # cost per service, $

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.r, self.Q, self.D, self.K)):
            raise ValidationError("analytic inputs must be finite")
        if self.r < 0:
            raise ValidationError("r must be >= 0")
        if not 0 <= self.Q <= 1:
            raise ValidationError("Q must be within [0, 1]")
        if self.D < 1:
            raise ValidationError("D must be >= 1")
        if self.K < 0:
            raise ValidationError("K must be >= 0")

    @property
    def no_service_loss(self) -> float:
        return self.r * self.Q * self.D / 2.0


def _check_x(x):
    if x < 0:
        raise ValidationError("service count x must be >= 0")


def lost_revenue_no_service(inp: AnalyticInputs) -> float:
    return inp.r * inp.Q * inp.D / 2.0


def lost_revenue_with_services(inp: AnalyticInputs, x: float) -> float:
    _check_x(x)
    return inp.r * inp.Q * inp.D / (2.0 * (x + 1))


def potential_service_revenue(inp: AnalyticInputs, x: float) -> float:
    _check_x(x)
    return 0.5 * inp.r * inp.Q * inp.D * (x / (x + 1))


def net_potential_revenue(inp: AnalyticInputs, x: float) -> float:
    """Service value net of cost; also accepts non-integer ``x >= 1``."""
    _check_x(x)
    if x == 0:
        return -inp.K
    return potential_service_revenue(inp, x) - inp.K * (x + 1)


def net_revenue_curve(inp: AnalyticInputs, x_max: int) -> np.ndarray:
    """Vectorised ``net_potential_revenue`` for ``x = 0..x_max``."""
    x = np.arange(x_max + 1, dtype=float)
    net = 0.5 * inp.r * inp.Q * inp.D * (x / (x + 1)) - inp.K * (x + 1)
    net[0] = -inp.K
    return net


def continuous_optimal_x(inp: AnalyticInputs) -> float:
    if inp.K <= 0:
        raise ValidationError("unbounded service count: K must be > 0")
    return -1.0 + math.sqrt(inp.r * inp.Q * inp.D / (2.0 * inp.K))


def optimal_service_count(inp: AnalyticInputs, x_max: int = 10_000) -> tuple[int, float]:
    """Integer argmax of the net value over ``0..x_max``; ties go to fewer services."""
    if x_max < 1:
        raise ValidationError("x_max must be >= 1")
    if inp.K == 0:
        # net value strictly increases with x when services are free
        cands = [0, x_max] if inp.no_service_loss > 0 else [0]
    else:
        xc = continuous_optimal_x(inp)
        cands = {0, 1}
        if xc > 1:
            cands |= {min(math.floor(xc), x_max), min(math.ceil(xc), x_max)}
    best_x, best = None, -math.inf
    for x in sorted(cands):
        v = net_potential_revenue(inp, x)
        if v > best:
            best_x, best = x, v
    return best_x, best
