"""Payoff manipulation and coverage design for Stackelberg security games."""
from .budgets import DesignSolution, L0Budget, L1Budget, LInfBudget
from .game import (GameInstance, PayoffDelta, SseSolution, apply_delta, attack_set,
                   attack_set_coverage, expected_utilities, origami, origami_bs,
                   restricted_value, solve_manipulated)
from .l0 import l0_greedy1, l0_greedy2, solve_l0, solve_l0_milp
from .l1 import (Discretization, approximation_bound, default_rho0, greedy_lower_bound,
                 overuse_upper_bound, solve_l1_bnb, solve_l1_greedy, solve_l1_milp, solve_l1_ptas)
from .linf import solve_linf

__all__ = [
    "DesignSolution", "Discretization", "GameInstance", "L0Budget", "L1Budget", "LInfBudget",
    "PayoffDelta", "SseSolution", "apply_delta", "approximation_bound", "attack_set",
    "attack_set_coverage", "default_rho0", "expected_utilities", "greedy_lower_bound",
    "l0_greedy1", "l0_greedy2", "origami", "origami_bs", "overuse_upper_bound",
    "restricted_value", "solve_l0", "solve_l0_milp", "solve_l1_bnb", "solve_l1_greedy",
    "solve_l1_milp", "solve_l1_ptas", "solve_linf", "solve_manipulated",
]
