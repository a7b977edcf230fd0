"""Adapter for an external solver driven through LP and solution files."""

from __future__ import annotations

import shlex
import subprocess
import tempfile
import time
from pathlib import Path

import numpy as np

from ..model import ProblemInstance
from .lp import SolveOptions, SolveResult, SolverError
from .lpfile import parse_solution_file, write_lp_file


def render_command(template: str, lp_path, sol_path) -> list[str]:
    cmd = template.replace("{lp}", shlex.quote(str(lp_path)))
    cmd = cmd.replace("{sol}", shlex.quote(str(sol_path)))
    return shlex.split(cmd)


def solve_external(instance: ProblemInstance, opts: SolveOptions) -> SolveResult:
    start = time.perf_counter()
    with tempfile.TemporaryDirectory(prefix="vrfbopt-") as tmp:
        lp_path = Path(tmp) / "model.lp"
        sol_path = Path(tmp) / "model.sol"
        lp_path.write_text(write_lp_file(instance))
        argv = render_command(opts.solver_cmd, lp_path, sol_path)
        try:
            proc = subprocess.run(argv, capture_output=True, text=True,
                                  timeout=opts.time_limit)
        except FileNotFoundError as exc:
            raise SolverError(f"external solver not found: {argv[0]}") from exc
        except subprocess.TimeoutExpired:
            return SolveResult("limit-reached", np.nan, None, instance.names,
                               wall_time=time.perf_counter() - start)
        if proc.returncode != 0:
            raise SolverError(
                f"external solver exited with code {proc.returncode}: {proc.stderr.strip()[-500:]}")
        if not sol_path.exists():
            raise SolverError("external solver wrote no solution file")
        parsed = parse_solution_file(sol_path.read_text(), instance.names)

    status = parsed.pop("#status", "optimal")
    if status in ("infeasible", "unbounded"):
        return SolveResult(status, np.nan, None, instance.names,
                           wall_time=time.perf_counter() - start)
    missing = [n for n in instance.names if n not in parsed]
    if missing:
        raise SolverError(f"solution lacks {len(missing)} variables, e.g. {missing[0]}")
    values = np.array([parsed[n] for n in instance.names])
    viol = instance.max_violation(values)
    if viol > max(opts.feas_tol, 1e-6):
        raise SolverError(f"external solution violates constraints by {viol:.3g}")
    return SolveResult("optimal", instance.objective_value(values), values, instance.names,
                       wall_time=time.perf_counter() - start)
