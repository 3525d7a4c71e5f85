"""Brute-force references for checking the designers.

None of these call the solvers they are meant to check. The equilibrium of
each enumerated game is found by bisection on the attacker's utility level,
evaluated for a whole batch of games at once.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

from .budgets import L0Budget, L1Budget, LInfBudget
from .game import GameInstance, PayoffDelta

STATE_CAP = 10**7
BATCH = 100_000
_MEMBER_TOL = 1e-9


class OracleTooLarge(RuntimeError):
    pass


def _coverage(R, P, level):
    D = R - P
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.where(D > 0, (R - level) / np.where(D > 0, D, 1.0), 0.0)
    return np.clip(c, 0.0, 1.0)


def batch_level(R, P, r):
    """Smallest attacker level each row's coverage budget ``r`` can enforce.

    Removed targets are passed with R = P = -inf.
    """
    R = np.atleast_2d(np.asarray(R, dtype=float))
    P = np.atleast_2d(np.asarray(P, dtype=float))
    lo = P.max(axis=1)
    hi = R.max(axis=1)
    Rm = np.where(np.isfinite(R), R, 0.0)
    Pm = np.where(np.isfinite(P), P, 0.0)

    def need(level):
        return _coverage(Rm, Pm, level[:, None]).sum(axis=1)

    at_floor = need(lo) <= r + 1e-12
    a, b = lo.copy(), hi.copy()
    for _ in range(200):
        mid = 0.5 * (a + b)
        active = ~at_floor & (mid > a) & (mid < b)
        if not active.any():
            break
        ok = need(mid) <= r + 1e-12
        b = np.where(active & ok, mid, b)
        a = np.where(active & ~ok, mid, a)
    return np.where(at_floor, lo, b)


def batch_values(Rd, Pd, R, P, r, target=None):
    """Defender SSE utility per row; with ``target`` the utility restricted to it.

    Returns (values, levels, coverage).
    """
    R = np.atleast_2d(R)
    P = np.atleast_2d(P)
    M = batch_level(R, P, r)
    Rm = np.where(np.isfinite(R), R, 0.0)
    Pm = np.where(np.isfinite(P), P, 0.0)
    c = _coverage(Rm, Pm, M[:, None])
    c = np.where(np.isfinite(R), c, 0.0)
    scale = np.maximum(1.0, np.abs(M))[:, None]
    member = np.isfinite(R) & (Rm >= M[:, None] - _MEMBER_TOL * scale)
    member &= (c < 1.0) | (Pm >= M[:, None] - _MEMBER_TOL * scale)
    # a flat target (R = P = 0) at the level can absorb whatever coverage is left
    flat = np.isfinite(R) & (Rm == 0) & (Pm == 0) & member
    left = np.clip(r - c.sum(axis=1, keepdims=True), 0.0, 1.0)
    c = np.where(flat, left, c)
    ud = c * Rd + (1 - c) * Pd
    ud = np.where(member, ud, -np.inf)
    vals = ud.max(axis=1) if target is None else ud[:, target]
    return vals, M, c


def sse_value(game: GameInstance) -> float:
    vals, _, _ = batch_values(game.reward_def, game.penalty_def, game.reward_att,
                              game.penalty_att, game.resources)
    return float(vals[0])


def _enumerate_units(caps, weights, budget_units, cap=STATE_CAP):
    """All integer vectors k with 0 <= k_c <= caps_c and sum w_c k_c <= budget_units."""
    states = np.zeros((1, 0), dtype=np.int32)
    rem = np.array([budget_units], dtype=float)
    for cmax, w in zip(caps, weights):
        top = np.minimum(np.floor(rem / w + 1e-9), cmax).astype(np.int64)
        total = int((top + 1).sum())
        if total > cap:
            raise OracleTooLarge(f"grid enumeration needs more than {cap} states")
        reps = top + 1
        idx = np.repeat(np.arange(len(states)), reps)
        offs = np.arange(total) - np.repeat(np.cumsum(reps) - reps, reps)
        states = np.column_stack([states[idx], offs.astype(np.int32)])
        rem = rem[idx] - w * offs
    return states


def _l1_candidate(game, budget, step, i, signed, cap):
    """Enumerate grid manipulations for attack target ``i``.

    Returns (values restricted to i, eps, delta) for every state.
    """
    n = game.n
    units = budget.B / step
    R, P = game.reward_att, game.penalty_att
    if signed:
        # eps_i up, delta_i up (toward 0), others down
        dirs_e = np.where(np.arange(n) == i, 1.0, -1.0)
        dirs_d = np.where(np.arange(n) == i, 1.0, -1.0)
        cap_e = np.where(dirs_e > 0, np.inf, np.floor(R / step + 1e-9))
        cap_d = np.where(dirs_d > 0, np.floor(-P / step + 1e-9), np.inf)
        caps = np.concatenate([cap_e, cap_d])
        weights = np.concatenate([budget.mu, budget.theta])
        k = _enumerate_units(caps, weights, units, cap)
        eps = k[:, :n] * step * dirs_e
        dlt = k[:, n:] * step * dirs_d
    else:
        # each coordinate split into an up and a down part, at most one used
        cap_up_e = np.full(n, np.inf)
        cap_dn_e = np.floor(R / step + 1e-9)
        cap_up_d = np.floor(-P / step + 1e-9)
        cap_dn_d = np.full(n, np.inf)
        caps = np.concatenate([cap_up_e, cap_dn_e, cap_up_d, cap_dn_d])
        weights = np.concatenate([budget.mu, budget.mu, budget.theta, budget.theta])
        k = _enumerate_units(caps, weights, units, cap)
        both = ((k[:, :n] > 0) & (k[:, n:2 * n] > 0)) | ((k[:, 2 * n:3 * n] > 0) & (k[:, 3 * n:] > 0))
        k = k[~both.any(axis=1)]
        eps = (k[:, :n] - k[:, n:2 * n]) * step
        dlt = (k[:, 2 * n:3 * n] - k[:, 3 * n:]) * step
    vals = np.empty(len(k))
    for s in range(0, len(k), BATCH):
        sl = slice(s, s + BATCH)
        Rb = np.maximum(R + eps[sl], 0.0)
        Pb = np.minimum(P + dlt[sl], 0.0)
        vals[sl], _, _ = batch_values(game.reward_def, game.penalty_def, Rb, Pb,
                                      game.resources, target=i)
    return vals, eps, dlt


def l1_grid_oracle(game: GameInstance, budget: L1Budget, step: float, target: int | None = None,
                   signed: bool = True, cap: int = STATE_CAP, max_touched: int | None = None):
    """Best grid manipulation with changes in multiples of ``step``.

    With ``target`` the search is restricted to keeping that target attacked;
    with ``max_touched`` to manipulations changing at most that many targets.
    Ties prefer the cheapest manipulation, then the fewest touched targets.
    Returns (value, PayoffDelta).
    """
    if step <= 0:
        raise ValueError("step must be positive")
    cands = range(game.n) if target is None else [target]
    best = (-math.inf, PayoffDelta.zeros(game.n), math.inf, game.n + 1)
    for i in cands:
        vals, eps, dlt = _l1_candidate(game, budget, step, i, signed, cap)
        if max_touched is not None:
            keep = ((eps != 0) | (dlt != 0)).sum(axis=1) <= max_touched
            vals, eps, dlt = vals[keep], eps[keep], dlt[keep]
        top = vals.max()
        if not np.isfinite(top):
            continue
        near = np.flatnonzero(vals >= top - 1e-12)
        cost = (np.abs(eps[near]) * budget.mu + np.abs(dlt[near]) * budget.theta).sum(axis=1)
        count = ((np.abs(eps[near]) + np.abs(dlt[near])) > 0).sum(axis=1)
        j = np.lexsort((count, cost))[0]
        pick, cand_cost, cand_count = near[j], float(cost[j]), int(count[j])
        if top > best[0] + 1e-12 or (top >= best[0] - 1e-12 and (cand_cost, cand_count) < best[2:]):
            best = (float(top), PayoffDelta(eps[pick], dlt[pick]), cand_cost, cand_count)
    return best[0], best[1]


def l0_enum_oracle(game: GameInstance, budget: L0Budget, cap: int = STATE_CAP):
    """Enumerate removal sets of size <= B, optionally zeroing one more penalty.

    Returns (value, PayoffDelta); smaller modifications win ties.
    """
    n, B = game.n, min(budget.B, game.n)
    R, P = game.reward_att, game.penalty_att
    rows_R, rows_P, meta = [], [], []
    for size in range(0, min(B, n - 1) + 1):
        for drop in itertools.combinations(range(n), size):
            Rr, Pr = R.copy(), P.copy()
            Rr[list(drop)] = -np.inf
            Pr[list(drop)] = -np.inf
            rows_R.append(Rr)
            rows_P.append(Pr)
            meta.append((drop, None))
            if size < B:
                for t in range(n):
                    if t in drop or P[t] == 0:
                        continue
                    Pz = Pr.copy()
                    Pz[t] = 0.0
                    rows_R.append(Rr)
                    rows_P.append(Pz)
                    meta.append((drop, t))
            if len(meta) > cap:
                raise OracleTooLarge(f"more than {cap} removal patterns")
    vals, _, _ = batch_values(game.reward_def, game.penalty_def, np.array(rows_R),
                              np.array(rows_P), game.resources)
    # meta is ordered by modification size, so the first maximiser is the smallest
    sizes = np.array([len(d) + (t is not None) for d, t in meta])
    top = vals.max()
    near = np.flatnonzero(vals >= top - 1e-12)
    pick = near[np.argmin(sizes[near])]
    drop, t = meta[pick]
    removed = np.zeros(n, dtype=bool)
    removed[list(drop)] = True
    dlt = np.zeros(n)
    if t is not None:
        dlt[t] = -P[t]
    return float(top), PayoffDelta(np.zeros(n), dlt, removed)


def linf_ranges(game: GameInstance, budget: LInfBudget):
    """Admissible (low, high) intervals of eps and delta after sign clamping."""
    R, P = game.reward_att, game.penalty_att
    eps_lo = -np.minimum(budget.Br, R)
    eps_hi = budget.Br.copy()
    dlt_lo = -budget.Bp.copy()
    dlt_hi = np.minimum(budget.Bp, -P)
    return eps_lo, eps_hi, dlt_lo, dlt_hi


def linf_grid_oracle(game: GameInstance, budget: LInfBudget, points_per_axis: int = 5,
                     cap: int = STATE_CAP):
    """Max SSE value over an evenly spaced grid of admissible manipulations."""
    if points_per_axis < 2:
        raise ValueError("need at least the two endpoints per axis")
    n = game.n
    eps_lo, eps_hi, dlt_lo, dlt_hi = linf_ranges(game, budget)
    axes = [np.unique(np.linspace(a, b, points_per_axis))
            for a, b in zip(np.concatenate([eps_lo, dlt_lo]), np.concatenate([eps_hi, dlt_hi]))]
    total = math.prod(len(a) for a in axes)
    if total > cap:
        raise OracleTooLarge(f"grid has {total} points, cap is {cap}")
    grids = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.reshape(-1) for g in grids], axis=1)
    best = -math.inf
    for s in range(0, len(pts), BATCH):
        chunk = pts[s:s + BATCH]
        Rb = np.maximum(game.reward_att + chunk[:, :n], 0.0)
        Pb = np.minimum(game.penalty_att + chunk[:, n:], 0.0)
        vals, _, _ = batch_values(game.reward_def, game.penalty_def, Rb, Pb, game.resources)
        best = max(best, float(vals.max()))
    return best


def manipulated_target_count(manip: PayoffDelta, tol: float = 0.0) -> int:
    """Targets whose reward or penalty moved by more than ``tol``, or that were removed."""
    moved = (np.abs(manip.eps) + np.abs(manip.delta)) > tol
    return int((moved | manip.removed).sum())
