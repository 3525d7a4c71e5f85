"""LP/MILP modelling, a dense simplex, branch-and-bound and LP text I/O."""
from .bnb import relative_gap, solve_milp
from .lpformat import export_lp_format, parse_lp_format
from .model import Constraint, LinearModel, SolveResult, Variable
from .simplex import solve_lp

__all__ = [
    "Constraint", "LinearModel", "SolveResult", "Variable",
    "export_lp_format", "parse_lp_format", "relative_gap", "solve_lp", "solve_milp",
]
