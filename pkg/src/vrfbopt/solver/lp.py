"""LP solving front end: options, results and the relaxation kernel."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from ..model import ProblemInstance
from .simplex import simplex

log = logging.getLogger(__name__)

STATUSES = ("optimal", "infeasible", "unbounded", "limit-reached")

# The dense simplex keeps an m x m basis inverse; above this row count the
# auto engine hands relaxations to HiGHS.
AUTO_SIMPLEX_MAX_ROWS = 400


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolveOptions:
    backend: str = "builtin"  # "builtin" or "external"
    solver_cmd: str | None = None  # template with {lp} and {sol}
    lp_engine: str = "auto"  # "auto", "simplex" or "highs"
    mip_gap: float = 1e-6
    abs_tol: float = 1e-6
    feas_tol: float = 1e-7
    time_limit: float | None = None
    node_limit: int | None = None
    workers: int = 1

    def __post_init__(self):
        if self.backend not in ("builtin", "external"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.backend == "external" and not self.solver_cmd:
            raise ValueError("external backend needs a solver command")
        if self.lp_engine not in ("auto", "simplex", "highs"):
            raise ValueError(f"unknown lp engine {self.lp_engine!r}")
        if min(self.mip_gap, self.abs_tol, self.feas_tol) <= 0:
            raise ValueError("tolerances must be > 0")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class SolveResult:
    status: str
    objective: float
    values: np.ndarray | None
    names: tuple = ()
    gap: float = 0.0
    nodes: int = 0
    iterations: int = 0
    wall_time: float = 0.0
    duals: np.ndarray | None = None
    certificate: int | None = None
    incumbents: list = field(default_factory=list, repr=False)

    @property
    def assignment(self) -> dict:
        if self.values is None:
            return {}
        return dict(zip(self.names, self.values.tolist()))

    def value(self, name: str) -> float:
        return float(self.values[self.names.index(name)])


class Relaxation:
    """Solves the LP relaxation of an instance under bound overrides."""

    def __init__(self, instance: ProblemInstance, opts: SolveOptions):
        self.instance = instance
        self.opts = opts
        engine = opts.lp_engine
        if engine == "auto":
            engine = "simplex" if instance.n_rows <= AUTO_SIMPLEX_MAX_ROWS else "highs"
        self.engine = engine
        self.row_lo, self.row_hi = instance.row_bounds()
        if engine == "highs":
            A = sp.csr_matrix(instance.A)
            senses = np.asarray(instance.senses)
            le, ge, eq = senses == "<=", senses == ">=", senses == "="
            self._A_ub = sp.vstack([A[le], -A[ge]]).tocsr()
            self._b_ub = np.concatenate([instance.rhs[le], -instance.rhs[ge]])
            self._A_eq = A[eq]
            self._b_eq = instance.rhs[eq]

    def solve(self, lb=None, ub=None, time_limit=None) -> SolveResult:
        inst = self.instance
        lb = inst.lb if lb is None else lb
        ub = inst.ub if ub is None else ub
        start = time.perf_counter()
        if self.engine == "simplex":
            res = simplex(-inst.c, inst.A, self.row_lo, self.row_hi, lb, ub,
                          time_limit=time_limit)
            out = SolveResult(res.status, -res.fun if res.status == "optimal" else np.nan,
                              res.x, inst.names, iterations=res.iterations,
                              duals=None if res.y is None else -res.y,
                              certificate=res.certificate)
        else:
            out = self._highs(lb, ub, time_limit)
        out.wall_time = time.perf_counter() - start
        return out

    def _highs(self, lb, ub, time_limit) -> SolveResult:
        inst = self.instance
        if np.any(lb > ub):
            return SolveResult("infeasible", np.nan, None, inst.names)
        options = {"presolve": True}
        if time_limit is not None:
            options["time_limit"] = float(time_limit)
        kw = dict(A_ub=self._A_ub if self._A_ub.shape[0] else None,
                  b_ub=self._b_ub if self._A_ub.shape[0] else None,
                  A_eq=self._A_eq if self._A_eq.shape[0] else None,
                  b_eq=self._b_eq if self._A_eq.shape[0] else None,
                  bounds=np.column_stack([lb, ub]), method="highs", options=options)
        res = linprog(-inst.c, **kw)
        if res.status == 0:
            return SolveResult("optimal", -float(res.fun), np.asarray(res.x), inst.names,
                               iterations=int(getattr(res, "nit", 0)))
        if res.status == 1:
            return SolveResult("limit-reached", np.nan, None, inst.names)
        if res.status in (2, 3):
            # HiGHS may report "infeasible or unbounded" as infeasible
            probe = linprog(np.zeros_like(inst.c), **kw)
            status = "unbounded" if probe.status == 0 else "infeasible"
            return SolveResult(status, np.nan, None, inst.names)
        raise SolverError(f"HiGHS failed: {res.message}")


def solve_lp(instance: ProblemInstance, opts: SolveOptions | None = None) -> SolveResult:
    """Optimal basic solution of a pure LP (no integrality marks)."""
    opts = opts or SolveOptions()
    if instance.is_mip:
        raise SolverError("solve_lp needs an instance without integer variables")
    if opts.backend == "external":
        from .external import solve_external
        return solve_external(instance, opts)
    res = Relaxation(instance, opts).solve(time_limit=opts.time_limit)
    if res.status == "optimal":
        viol = instance.max_violation(res.values)
        if viol > max(opts.feas_tol, 1e-6):
            raise SolverError(f"LP solution violates constraints by {viol:.3g}")
    return res
