"""Designer for per-target manipulation ranges (weighted L-infinity budget).

For a fixed attack target i the best move is extreme: push i's reward and
penalty to the top of their ranges and every other target's to the bottom.
So the problem reduces to n ordinary games.
"""
from __future__ import annotations

import numpy as np

from .budgets import DesignSolution, LInfBudget
from .game import GameInstance, PayoffDelta, origami_bs, solve_manipulated


def corner_delta(game: GameInstance, budget: LInfBudget, i: int) -> PayoffDelta:
    """Upper range ends for target i, lower range ends elsewhere, kept sign-feasible."""
    R, P = game.reward_att, game.penalty_att
    R_new = np.maximum(R - budget.Br, 0.0)
    P_new = P - budget.Bp
    R_new[i] = R[i] + budget.Br[i]
    P_new[i] = min(0.0, P[i] + budget.Bp[i])
    return PayoffDelta(R_new - R, P_new - P)


def solve_linf(game: GameInstance, budget: LInfBudget) -> DesignSolution:
    if len(budget.Br) != game.n:
        raise ValueError("range vectors do not match the game")
    best, best_manip = None, None
    for i in range(game.n):
        manip = corner_delta(game, budget, i)
        val = origami_bs(game.replace(reward_att=game.reward_att + manip.eps,
                                      penalty_att=np.minimum(game.penalty_att + manip.delta, 0.0))).value
        if best is None or val > best + 1e-12:
            best, best_manip = val, manip
    sse = solve_manipulated(game, best_manip)
    used = float(max(np.max(np.abs(best_manip.eps) / np.where(budget.Br > 0, budget.Br, 1.0)),
                     np.max(np.abs(best_manip.delta) / np.where(budget.Bp > 0, budget.Bp, 1.0))))
    return DesignSolution(best_manip, sse, used, None, "optimal")
