"""Bounded-variable revised simplex with an explicit dense basis inverse.

Solves ``min c@x  s.t.  row_lo <= A@x <= row_hi,  lb <= x <= ub``. Each row
gets a logical variable ``s = A@x`` carrying the row bounds, so the working
system is ``A@x - s = 0``. Rows whose logical starts out of bounds get an
artificial column and phase one drives the artificials to zero.

Pricing is Dantzig's rule with a Harris two-pass ratio test. After a run of
degenerate pivots the method falls back to Bland's rule until progress
resumes. Ties always break toward the lowest variable index.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

BASIC, AT_LB, AT_UB, FREE, FIXED = 0, 1, 2, 3, 4


@dataclass
class SimplexResult:
    status: str
    x: np.ndarray | None
    fun: float
    y: np.ndarray | None  # multipliers of A@x - s = 0
    iterations: int
    certificate: int | None = None  # infeasible row or unbounded ray column


class _Tableau:
    def __init__(self, c, A, row_lo, row_hi, lb, ub, tol):
        self.m, self.n = A.shape
        self.A = sp.csc_matrix(A, dtype=float)
        self.At = sp.csr_matrix(self.A.T)
        self.tol = tol
        m, n = self.m, self.n

        x0 = np.where(np.isfinite(lb), lb, np.where(np.isfinite(ub), ub, 0.0))
        act = self.A @ x0
        s0 = np.clip(act, row_lo, row_hi)
        resid = s0 - act
        art_rows = np.flatnonzero(np.abs(resid) > tol * (1.0 + np.abs(act)))
        self.art_rows = art_rows
        self.art_sign = np.sign(resid[art_rows])
        k = len(art_rows)

        self.N = n + m + k
        self.lo = np.concatenate([lb, row_lo, np.zeros(k)])
        self.hi = np.concatenate([ub, row_hi, np.full(k, np.inf)])
        self.cost = np.concatenate([c, np.zeros(m + k)])

        self.value = np.concatenate([x0, s0, np.abs(resid[art_rows])])
        self.state = np.empty(self.N, dtype=np.int8)
        self._set_nonbasic_states(np.arange(self.N))
        self.basis = np.arange(n, n + m)
        self.basis[art_rows] = n + m + np.arange(k)
        self.state[self.basis] = BASIC
        self.refactor()

    def _set_nonbasic_states(self, idx):
        lo, hi = self.lo[idx], self.hi[idx]
        st = np.where(np.isfinite(lo), AT_LB, np.where(np.isfinite(hi), AT_UB, FREE))
        st = np.where(lo == hi, FIXED, st)
        v = self.value[idx]
        st = np.where((st == AT_LB) & np.isfinite(hi) & (np.abs(v - hi) < np.abs(v - lo)), AT_UB, st)
        self.state[idx] = st

    def column(self, j) -> np.ndarray:
        col = np.zeros(self.m)
        if j < self.n:
            s, e = self.A.indptr[j], self.A.indptr[j + 1]
            col[self.A.indices[s:e]] = self.A.data[s:e]
        elif j < self.n + self.m:
            col[j - self.n] = -1.0
        else:
            a = j - self.n - self.m
            col[self.art_rows[a]] = self.art_sign[a]
        return col

    def product(self, v):
        """``M @ v`` for the full column set."""
        n, m = self.n, self.m
        out = self.A @ v[:n] - v[n:n + m]
        if len(self.art_rows):
            np.add.at(out, self.art_rows, self.art_sign * v[n + m:])
        return out

    def refactor(self):
        B = np.column_stack([self.column(j) for j in self.basis]) if self.m else np.zeros((0, 0))
        self.Binv = np.linalg.inv(B) if self.m else B
        v = self.value.copy()
        v[self.basis] = 0.0
        self.value[self.basis] = -self.Binv @ self.product(v)

    def reduced_costs(self, y):
        n, m = self.n, self.m
        d = self.cost.copy()
        d[:n] -= self.At @ y
        d[n:n + m] += y
        if len(self.art_rows):
            d[n + m:] -= self.art_sign * y[self.art_rows]
        return d


def simplex(c, A, row_lo, row_hi, lb, ub, *, tol=1e-9, max_iter=None,
            time_limit=None, refactor_every=100, bland_after=50) -> SimplexResult:
    c = np.asarray(c, dtype=float)
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    row_lo = np.asarray(row_lo, dtype=float)
    row_hi = np.asarray(row_hi, dtype=float)
    if np.any(lb > ub) or np.any(row_lo > row_hi):
        bad = np.flatnonzero(row_lo > row_hi)
        return SimplexResult("infeasible", None, np.nan, None, 0,
                             int(bad[0]) if len(bad) else None)

    tab = _Tableau(c, A, row_lo, row_hi, lb, ub, tol)
    n, m = tab.n, tab.m
    if max_iter is None:
        max_iter = 50 * (n + m) + 1000
    deadline = None if time_limit is None else time.monotonic() + time_limit
    iters = 0

    def run(cost):
        nonlocal iters
        tab.cost = cost
        since_refactor = 0
        degenerate = 0
        while True:
            if since_refactor >= refactor_every:
                tab.refactor()
                since_refactor = 0
            if iters >= max_iter or (deadline is not None and time.monotonic() > deadline):
                return "limit-reached", None
            y = tab.cost[tab.basis] @ tab.Binv
            d = tab.reduced_costs(y)
            st = tab.state
            up = ((st == AT_LB) | (st == FREE)) & (d < -tol)
            down = ((st == AT_UB) | (st == FREE)) & (d > tol)
            elig = up | down
            if not elig.any():
                return "optimal", None
            bland = degenerate >= bland_after
            if bland:
                j = int(np.flatnonzero(elig)[0])
            else:
                score = np.where(elig, np.abs(d), -1.0)
                j = int(np.argmax(score))
            direction = 1.0 if up[j] else -1.0

            w = tab.Binv @ tab.column(j)
            delta = -direction * w  # rate of change of basic values
            xb = tab.value[tab.basis]
            lob, hib = tab.lo[tab.basis], tab.hi[tab.basis]
            piv_tol = 1e-9
            dec = delta < -piv_tol
            inc = delta > piv_tol
            with np.errstate(divide="ignore", invalid="ignore"):
                exact = np.full(m, np.inf)
                exact[dec] = (xb[dec] - lob[dec]) / -delta[dec]
                exact[inc] = (hib[inc] - xb[inc]) / delta[inc]
                exact = np.maximum(exact, 0.0)
                if bland:
                    relaxed = exact
                else:
                    relaxed = np.full(m, np.inf)
                    relaxed[dec] = (xb[dec] - lob[dec] + tol) / -delta[dec]
                    relaxed[inc] = (hib[inc] - xb[inc] + tol) / delta[inc]
            flip = tab.hi[j] - tab.lo[j]
            tmax = min(relaxed.min(initial=np.inf), flip)
            if not np.isfinite(tmax):
                return "unbounded", j

            if flip <= tmax and flip <= exact.min(initial=np.inf):
                step = flip
                tab.value[j] = tab.hi[j] if direction > 0 else tab.lo[j]
                tab.state[j] = AT_UB if direction > 0 else AT_LB
                tab.value[tab.basis] = xb + step * delta
                degenerate = 0 if step > tol else degenerate + 1
                iters += 1
                continue

            cand = np.flatnonzero(exact <= tmax + 1e-15)
            if bland:
                tmin = exact[cand].min()
                ties = cand[exact[cand] <= tmin + 1e-15]
                r = int(ties[np.argmin(tab.basis[ties])])
            else:
                mags = np.abs(delta[cand])
                best = mags.max()
                ties = cand[mags >= best * (1 - 1e-12)]
                r = int(ties[np.argmin(tab.basis[ties])])
            step = exact[r]

            leaving = tab.basis[r]
            new_basic = xb + step * delta
            entering_value = tab.value[j] + direction * step
            tab.value[tab.basis] = new_basic
            tab.value[leaving] = tab.lo[leaving] if delta[r] < 0 else tab.hi[leaving]
            tab.state[leaving] = AT_LB if delta[r] < 0 else AT_UB
            if tab.lo[leaving] == tab.hi[leaving]:
                tab.state[leaving] = FIXED
            tab.basis[r] = j
            tab.state[j] = BASIC
            tab.value[j] = entering_value

            piv = w[r]
            row_r = tab.Binv[r] / piv
            tab.Binv -= np.outer(w, row_r)
            tab.Binv[r] = row_r
            since_refactor += 1
            degenerate = 0 if step > tol else degenerate + 1
            iters += 1

    k = len(tab.art_rows)
    if k:
        phase1 = np.zeros(tab.N)
        phase1[n + m:] = 1.0
        status, _ = run(phase1)
        if status != "optimal":
            return SimplexResult(status, None, np.nan, None, iters)
        tab.refactor()
        art_val = tab.value[n + m:]
        scale = 1.0 + np.max(np.abs(tab.value[:n + m]), initial=0.0)
        if art_val.sum() > 1e-7 * scale:
            worst = int(tab.art_rows[np.argmax(art_val)])
            return SimplexResult("infeasible", None, np.nan, None, iters, worst)
        tab.hi[n + m:] = 0.0
        nb = np.flatnonzero((tab.state[n + m:] != BASIC)) + n + m
        tab.value[nb] = 0.0
        tab.state[nb] = FIXED

    phase2 = np.concatenate([c, np.zeros(m + k)])
    status, ray = run(phase2)
    if status == "unbounded":
        return SimplexResult("unbounded", None, -np.inf, None, iters, ray)
    if status != "optimal":
        return SimplexResult(status, None, np.nan, None, iters)
    tab.refactor()
    x = tab.value[:n].copy()
    y = tab.cost[tab.basis] @ tab.Binv
    return SimplexResult("optimal", x, float(c @ x), y, iters)


def lagrangian_bound(c, A, row_lo, row_hi, lb, ub, y) -> float:
    """Dual objective of multipliers ``y`` (a lower bound on the minimum).

    Returns ``-inf`` when ``y`` is not dual feasible for the given boxes.
    """
    d = np.asarray(c, dtype=float) - sp.csr_matrix(A).T @ y

    def box_min(coef, lo, hi, tol=1e-9):
        pos, neg = coef > tol, coef < -tol
        if np.any(~np.isfinite(lo[pos])) or np.any(~np.isfinite(hi[neg])):
            return -np.inf
        return float(coef[pos] @ lo[pos] + coef[neg] @ hi[neg])

    return (box_min(d, np.asarray(lb, dtype=float), np.asarray(ub, dtype=float))
            + box_min(np.asarray(y, dtype=float), np.asarray(row_lo, dtype=float),
                      np.asarray(row_hi, dtype=float)))
