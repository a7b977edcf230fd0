"""Synthetic price series and small instances shared by the tests."""

import numpy as np

from vrfbopt.core import MarketSeries


def seasonal_prices(n_days, seed, shape=(-1.0, 1.0), base=(60.0, 80.0), spread=(10.0, 120.0)):
    """Each day repeats ``shape`` scaled by its own spread around its own base."""
    rng = np.random.default_rng(seed)
    s = rng.uniform(*spread, n_days)
    b = rng.uniform(*base, n_days)
    day = np.asarray(shape, dtype=float)
    return MarketSeries((b[:, None] + 0.5 * s[:, None] * day[None, :]).ravel())


def identical_days(n_days, day_prices):
    return MarketSeries(np.tile(np.asarray(day_prices, dtype=float), n_days))


def random_prices(n_hours, seed, lo=0.0, hi=100.0):
    return MarketSeries(np.random.default_rng(seed).uniform(lo, hi, n_hours))


def random_box_lp(rng, n_max=6, m_max=8):
    """Random bounded LP ``min c@x, row_lo <= A@x <= row_hi, lb <= x <= ub``.

    Rows are built around an interior point so most draws are feasible; a
    few get a tightened range that may cut it off.
    """
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(1, m_max + 1))
    c = rng.normal(size=n)
    A = np.round(rng.uniform(-1, 1, (m, n)), 3)
    A[rng.random((m, n)) < 0.2] = 0.0
    lb = -rng.uniform(0, 3, n)
    ub = rng.uniform(0.5, 3, n)
    lb[rng.random(n) < 0.5] = 0.0
    x0 = rng.uniform(lb, ub)
    act = A @ x0
    row_hi = act + rng.uniform(-0.3, 1.0, m)
    row_lo = np.where(rng.random(m) < 0.3, act - rng.uniform(0, 1.0, m), -np.inf)
    eq = rng.random(m) < 0.1
    row_lo[eq] = row_hi[eq] = act[eq]
    return c, A, row_lo, row_hi, lb, ub


def vertex_enumeration(c, A, row_lo, row_hi, lb, ub, tol=1e-9):
    """Minimum of a bounded LP by checking every basic solution.

    Returns ``None`` when no vertex is feasible.
    """
    import itertools

    n = len(c)
    G, h = [], []
    for i in range(A.shape[0]):
        if np.isfinite(row_hi[i]):
            G.append(A[i]); h.append(row_hi[i])
        if np.isfinite(row_lo[i]):
            G.append(-A[i]); h.append(-row_lo[i])
    eye = np.eye(n)
    for j in range(n):
        G.append(eye[j]); h.append(ub[j])
        G.append(-eye[j]); h.append(-lb[j])
    G, h = np.array(G), np.array(h)
    subsets = np.array(list(itertools.combinations(range(len(G)), n)))
    M = G[subsets]
    rhs = h[subsets]
    ok = np.abs(np.linalg.det(M)) > 1e-10
    xs = np.linalg.solve(M[ok], rhs[ok][..., None])[..., 0]
    feas = np.all(xs @ G.T <= h + tol, axis=1)
    if not feas.any():
        return None
    return float(np.min(xs[feas] @ c))


FLAT_DAY = (10.0, 10.0, 90.0, 90.0)


def identical_day_case(n_days=60, day=FLAT_DAY, cycle_life=200.0):
    """Identical days with pure, fully restorable cycle fade.

    Returns ``(params, prices, horizon, r, Q)`` where ``r`` is the revenue of
    one day at full capacity and ``Q`` the reversible fade just before the
    final service when no extra service is made. ``params`` carries K = 0;
    callers substitute their own service cost.
    """
    from vrfbopt.core import BatteryParams, Horizon, ServiceSchedule
    from vrfbopt.model import FixedB, assemble
    from vrfbopt.scheduler import periodic_schedule
    from vrfbopt.solver import solve_lp

    H = len(day)
    p = BatteryParams(rated_power=1.0, rated_capacity=1.0, rho_split=0.0, sigma_restore=1.0,
                      cycle_life=cycle_life, discount_rate=0.0, service_cost=0.0, vom_cost=0.3)
    one = assemble(p, MarketSeries(np.array(day)), Horizon(1, hours_per_day=H), FixedB(ServiceSchedule((1,))))
    r = solve_lp(one).objective
    prices = identical_days(n_days, day)
    h = Horizon(n_days, hours_per_day=H)
    base = assemble(p, prices, h, FixedB(periodic_schedule(0, n_days)))
    Q = float(solve_lp(base).values[base.roles["qcyc"]][-2])
    return p, prices, h, r, Q
