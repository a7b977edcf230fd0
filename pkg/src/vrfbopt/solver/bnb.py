"""Best-first branch and bound over the binary service-day variables."""

from __future__ import annotations

import heapq
import itertools
import math
import time

import numpy as np

from ..model import ProblemInstance
from .lp import Relaxation, SolveOptions, SolveResult, SolverError

INT_TOL = 1e-6


def _tie_key(instance: ProblemInstance, values: np.ndarray, int_idx: np.ndarray) -> tuple:
    """Fewer services first, then lexicographically earliest service days."""
    b = np.round(values[int_idx]).astype(int)
    days = tuple(np.flatnonzero(b).tolist())
    return (len(days), days)


def solve_milp(instance: ProblemInstance, opts: SolveOptions | None = None,
               incumbent: np.ndarray | None = None) -> SolveResult:
    """Maximise over the binaries of ``instance``.

    ``incumbent`` optionally seeds the search with a known feasible point.
    Nodes whose relaxation bound cannot beat the incumbent by more than
    ``min(abs_tol, mip_gap * max(1, |incumbent|))`` are pruned. Among all
    integer solutions met within that tolerance of the best, the one with
    the fewest services and then the earliest service days is returned.
    """
    opts = opts or SolveOptions()
    if opts.backend == "external":
        from .external import solve_external
        return solve_external(instance, opts)

    start = time.perf_counter()
    deadline = None if opts.time_limit is None else time.monotonic() + opts.time_limit
    int_idx = np.flatnonzero(instance.integer)
    relax = Relaxation(instance, opts)
    lp_iters = 0
    nodes = 0
    found = []  # (objective, values)

    def tolerance(best):
        return min(opts.abs_tol, opts.mip_gap * max(1.0, abs(best)))

    def best_obj():
        return max((f[0] for f in found), default=-math.inf)

    def finish(status, open_bound=None):
        wall = time.perf_counter() - start
        if not found:
            st = "infeasible" if status == "optimal" else status
            return SolveResult(st, np.nan, None, instance.names, nodes=nodes,
                               iterations=lp_iters, wall_time=wall, gap=math.inf)
        best = best_obj()
        tol = tolerance(best)
        ties = [f for f in found if f[0] >= best - tol]
        obj, vals = min(ties, key=lambda f: _tie_key(instance, f[1], int_idx))
        gap = 0.0
        if open_bound is not None and open_bound > best:
            gap = (open_bound - best) / max(1.0, abs(best))
        return SolveResult(status, obj, vals, instance.names, gap=gap, nodes=nodes,
                           iterations=lp_iters, wall_time=wall,
                           incumbents=[f[0] for f in found])

    def fix_and_solve(lb, ub, values):
        nonlocal lp_iters
        b = np.round(values[int_idx])
        lb2, ub2 = lb.copy(), ub.copy()
        lb2[int_idx] = b
        ub2[int_idx] = b
        res = relax.solve(lb2, ub2)
        lp_iters += res.iterations
        if res.status == "optimal":
            found.append((res.objective, res.values))

    if incumbent is not None:
        incumbent = np.asarray(incumbent, dtype=float)
        if instance.max_violation(incumbent) > max(opts.feas_tol, 1e-6):
            raise SolverError("seed incumbent is not feasible for this instance")
        found.append((instance.objective_value(incumbent), incumbent))

    counter = itertools.count()
    # heap entries: (-parent bound, node id, fixings)
    heap = [(-math.inf, next(counter), ())]
    while heap:
        if opts.node_limit is not None and nodes >= opts.node_limit:
            return finish("limit-reached", -heap[0][0])
        if deadline is not None and time.monotonic() > deadline:
            return finish("limit-reached", -heap[0][0])
        neg_bound, _, fixings = heapq.heappop(heap)
        best = best_obj()
        if found and -neg_bound <= best + tolerance(best):
            continue
        lb, ub = instance.lb.copy(), instance.ub.copy()
        for j, lo, hi in fixings:
            lb[j], ub[j] = max(lb[j], lo), min(ub[j], hi)
        res = relax.solve(lb, ub)
        nodes += 1
        lp_iters += res.iterations
        if res.status == "infeasible":
            continue
        if res.status == "unbounded":
            return SolveResult("unbounded", math.inf, None, instance.names, nodes=nodes,
                               wall_time=time.perf_counter() - start)
        if res.status != "optimal":
            return finish("limit-reached", -neg_bound)
        bound = res.objective
        if found and bound <= best + tolerance(best):
            continue
        frac = np.abs(res.values[int_idx] - np.round(res.values[int_idx]))
        if frac.max(initial=0.0) <= INT_TOL:
            fix_and_solve(lb, ub, res.values)
            continue
        # most fractional; argmin picks the lowest index among ties
        k = int(np.argmin(np.abs(res.values[int_idx] - 0.5)))
        j = int(int_idx[k])
        for v in (0.0, 1.0):
            heapq.heappush(heap, (-bound, next(counter), fixings + ((j, v, v),)))
    return finish("optimal")
