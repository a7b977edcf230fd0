"""Stand-in external solver: reads an LP file, writes a solution file.

Usage: python fake_solver.py MODEL.lp SOLUTION.sol [--fail | --drop NAME | --status S]
"""

import sys

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from vrfbopt.solver.lpfile import format_solution, read_lp_file


def main(argv):
    lp_path, sol_path = argv[:2]
    extra = argv[2:]
    if "--fail" in extra:
        print("licence error", file=sys.stderr)
        return 3
    inst = read_lp_file(open(lp_path).read())
    lo, hi = inst.row_bounds()
    res = milp(-inst.c, constraints=LinearConstraint(inst.A, lo, hi),
               integrality=inst.integer.astype(int), bounds=Bounds(inst.lb, inst.ub))
    names, values = list(inst.names), res.x if res.x is not None else np.zeros(len(inst.names))
    status = "optimal" if res.status == 0 else "infeasible"
    if "--status" in extra:
        status = extra[extra.index("--status") + 1]
    if "--drop" in extra:
        k = names.index(extra[extra.index("--drop") + 1])
        names.pop(k)
        values = np.delete(values, k)
    with open(sol_path, "w") as fh:
        fh.write(format_solution(names, values, status))
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
