from .bnb import solve_milp
from .lp import Relaxation, SolveOptions, SolveResult, SolverError, solve_lp
from .lpfile import LPFormatError, parse_solution_file, read_lp_file, write_lp_file
from .oracle import brute_force_oracle

__all__ = [
    "LPFormatError", "Relaxation", "SolveOptions", "SolveResult", "SolverError",
    "brute_force_oracle", "parse_solution_file", "read_lp_file", "solve_lp", "solve_milp",
    "write_lp_file",
]
