"""Designers for an L0 budget: up to B targets may have their attacker penalty changed.

An optimal manipulation only ever removes targets (penalty to minus infinity)
and possibly zeroes the penalty of the attack target. The exact method tries
every attack-set prefix in decreasing attacker reward and every attack
target; which targets to drop is a maximum weighted-average subset problem.
Configurations where a target ends up covered with certainty are handled by
a separate pass over fixed attacker levels.
"""
from __future__ import annotations

import math

import numpy as np

from .budgets import DesignSolution, L0Budget
from .game import GameInstance, PayoffDelta, origami, origami_bs, solve_manipulated
from .kernel import LinearModel, solve_milp

TOL = 1e-9
_MAX_ITER = 200


def max_avg_subset(v, w, keep: int):
    """Subset of size ``keep`` maximising sum(v) / sum(w).

    Dinkelbach iteration: for the current ratio lam take the ``keep`` largest
    v - lam * w (ties to the lower index) and recompute the ratio until it
    stops increasing. Returns (sorted index tuple, ratio).
    """
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if v.shape != w.shape or v.ndim != 1:
        raise ValueError("v and w must be vectors of equal length")
    if not 1 <= keep <= len(v):
        raise ValueError(f"keep must lie in [1, {len(v)}]")
    if np.any(w <= 0):
        raise ValueError("weights must be positive")
    lam = -math.inf
    sel = np.argsort(-v, kind="stable")[:keep]
    for _ in range(_MAX_ITER):
        new = v[sel].sum() / w[sel].sum()
        if new <= lam + 1e-15 * max(1.0, abs(lam)):
            break
        lam = new
        sel = np.argsort(-(v - lam * w), kind="stable")[:keep]
    return tuple(sorted(int(k) for k in sel)), float(v[sel].sum() / w[sel].sum())


def _batched_max_avg(V, W, valid, keep):
    """Row-wise max_avg_subset with a mask of admissible columns."""
    m = V.shape[0]
    rows = np.arange(m)[:, None]
    S = np.where(valid, V, -np.inf)
    sel = np.argpartition(-S, keep - 1, axis=1)[:, :keep]
    lam = np.full(m, -np.inf)
    for _ in range(_MAX_ITER):
        new = V[rows, sel].sum(axis=1) / W[rows, sel].sum(axis=1)
        moved = new > lam + 1e-15 * np.maximum(1.0, np.abs(np.where(np.isfinite(lam), lam, 0.0)))
        if not moved.any():
            break
        lam = np.where(moved, new, lam)
        S = np.where(valid, V - lam[:, None] * W, -np.inf)
        sel = np.argpartition(-S, keep - 1, axis=1)[:, :keep]
    return sel, lam


def _sorted_view(game: GameInstance):
    order = np.argsort(-game.reward_att, kind="stable")
    R = game.reward_att[order]
    P = game.penalty_att[order]
    return order, R, P


def _q_candidates(game: GameInstance, B: int):
    """Best configuration over all (prefix, attack target, zeroing) choices.

    Yields (value, removed original indices, zeroed target or None).
    """
    n, r = game.n, game.resources
    order, R, P = _sorted_view(game)
    Rd, Pd = game.reward_def[order], game.penalty_def[order]
    D = R - P
    flat = D <= 0
    E = np.where(flat, 0.0, 1.0 / np.where(flat, 1.0, D))
    best = (-math.inf, None, None)
    for l in range(1, n + 1):
        nxt = R[l] if l < n else -math.inf
        for z in (0, 1):
            if z > B:
                continue
            s = min(B - z, l - 1)
            keep = l - 1 - s
            idx = np.arange(l)
            if z:
                ok_i = (R[:l] > 0) & (P[:l] < 0)
                Ebar = np.where(ok_i, 1.0 / np.where(R[:l] > 0, R[:l], 1.0), 0.0)
            else:
                ok_i = ~flat[:l]
                Ebar = E[:l]
            if not ok_i.any():
                continue
            if keep == 0:
                lam = np.where(ok_i, r / np.where(ok_i, Ebar, 1.0), -np.inf)
                sel = None
            else:
                Ek, Rk = E[:l], R[:l]
                V = (R[:l, None] - Rk[None, :]) * Ek[None, :] + r / keep
                W = Ek[None, :] + Ebar[:, None] / keep
                valid = ~np.eye(l, dtype=bool) & ~flat[None, :l]
                enough = valid.sum(axis=1) >= keep
                ok_i = ok_i & enough
                if not ok_i.any():
                    continue
                rows = np.flatnonzero(ok_i)
                sel, lam_rows = _batched_max_avg(V[rows], W[rows], valid[rows], keep)
                lam = np.full(l, -np.inf)
                lam[rows] = lam_rows
            ci = np.where(ok_i, np.where(np.isfinite(lam), lam, 0.0) * Ebar, -np.inf)
            M = R[:l] - lam
            good = ok_i & (ci >= -TOL) & (ci <= 1 + TOL) & (M >= nxt - TOL * max(1.0, abs(nxt) if math.isfinite(nxt) else 1.0))
            if sel is not None:
                full_sel = np.zeros((l, keep), dtype=int)
                full_sel[rows] = sel
                ck = (R[full_sel] - M[:, None]) * E[full_sel]
                good &= np.all((ck >= -TOL) & (ck <= 1 + TOL), axis=1)
            if not good.any():
                continue
            ci = np.clip(ci, 0.0, 1.0)
            vals = np.where(good, ci * Rd[:l] + (1 - ci) * Pd[:l], -np.inf)
            i = int(np.argmax(vals))
            if vals[i] > best[0] + TOL:
                kept = set() if sel is None else set(full_sel[i].tolist())
                dropped = [int(order[k]) for k in idx if k != i and k not in kept]
                best = (float(vals[i]), dropped, int(order[i]) if z else None)
    return best


def _certainty_candidates(game: GameInstance, B: int):
    """Configurations whose attacker level is pinned by some penalty (or by 0)."""
    n, r = game.n, game.resources
    R, P = game.reward_att, game.penalty_att
    Rd, Pd = game.reward_def, game.penalty_def
    D = R - P
    best = (-math.inf, None, None)
    for i in range(n):
        for z in (0, 1):
            if z > B or (z and P[i] == 0):
                continue
            Pi = 0.0 if z else P[i]
            Di = R[i] - Pi
            left = B - z
            others = np.array([j for j in range(n) if j != i], dtype=int)
            if Di > 0:
                levels = np.unique(np.concatenate([P[others], [Pi]]))
                levels = levels[(levels >= Pi - TOL) & (levels <= R[i] + TOL)]
            else:
                levels = np.array([0.0])
            if levels.size == 0:
                continue
            Po, Ro, Do = P[others], R[others], D[others]
            Lv = levels[:, None]
            forced = Po[None, :] > Lv + TOL
            with np.errstate(divide="ignore", invalid="ignore"):
                need = np.where(Do[None, :] > 0, (Ro[None, :] - Lv) / np.where(Do > 0, Do, 1.0)[None, :], 0.0)
            need = np.where(forced, 0.0, np.clip(need, 0.0, 1.0))
            n_forced = forced.sum(axis=1)
            spare = np.clip(left - n_forced, 0, None)
            desc = -np.sort(-need, axis=1)
            csum = np.concatenate([np.zeros((len(levels), 1)), np.cumsum(desc, axis=1)], axis=1)
            saved = csum[np.arange(len(levels)), np.minimum(spare, len(others))]
            total = need.sum(axis=1) - saved
            if Di > 0:
                ci = np.clip((R[i] - levels) / Di, 0.0, 1.0)
            else:
                ci = np.clip(r - total, 0.0, 1.0)
            feas = (n_forced <= left) & (total + ci <= r + TOL)
            if not feas.any():
                continue
            vals = np.where(feas, ci * Rd[i] + (1 - ci) * Pd[i], -np.inf)
            a = int(np.argmax(vals))
            if vals[a] > best[0] + TOL:
                drop = set(others[forced[a]].tolist())
                room = int(spare[a])
                for k in np.argsort(-need[a], kind="stable")[:room]:
                    if need[a, k] > 0:
                        drop.add(int(others[k]))
                best = (float(vals[a]), sorted(drop), i if z else None)
    return best


def _witness(n, dropped, zeroed, P):
    removed = np.zeros(n, dtype=bool)
    removed[list(dropped)] = True
    dlt = np.zeros(n)
    if zeroed is not None:
        dlt[zeroed] = -P[zeroed]
    return PayoffDelta(np.zeros(n), dlt, removed)


def solve_l0(game: GameInstance, budget: L0Budget) -> DesignSolution:
    """Exact optimum for the L0 budget in O(n^3) (times a Dinkelbach factor)."""
    B = min(budget.B, game.n)
    q = _q_candidates(game, B)
    c = _certainty_candidates(game, B)
    pick = q if q[0] >= c[0] - TOL else c
    if pick[1] is None:
        manip = PayoffDelta.zeros(game.n)
    else:
        manip = _witness(game.n, pick[1], pick[2], game.penalty_att)
    sse = solve_manipulated(game, manip)
    info = {"subproblem_value": q[0], "certainty_value": c[0]}
    return DesignSolution(manip, sse, budget.cost(manip), (sse.value, sse.value), "optimal", info)


def _origami_value(game, removed, Pa):
    keep = np.flatnonzero(~removed)
    sub = GameInstance(game.reward_def[keep], game.penalty_def[keep], game.reward_att[keep],
                       Pa[keep], game.resources)
    return origami_bs(sub).value


def l0_greedy1(game: GameInstance, budget: L0Budget) -> DesignSolution:
    """Each round take the single removal or penalty zeroing that helps most."""
    n = game.n
    removed = np.zeros(n, dtype=bool)
    Pa = game.penalty_att.copy()
    for _ in range(min(budget.B, n)):
        best_rm, best_rm_t = -math.inf, None
        for t in range(n):
            if removed[t] or Pa[t] == 0 or removed.sum() >= n - 1:
                continue
            trial = removed.copy()
            trial[t] = True
            val = _origami_value(game, trial, Pa)
            if val > best_rm:
                best_rm, best_rm_t = val, t
        best_z, best_z_t = -math.inf, None
        if np.all(Pa[~removed] != 0):
            for t in np.flatnonzero(~removed):
                trial = Pa.copy()
                trial[t] = 0.0
                val = _origami_value(game, removed, trial)
                if val > best_z:
                    best_z, best_z_t = val, int(t)
        if best_rm_t is None and best_z_t is None:
            break
        if best_rm >= best_z:
            removed[best_rm_t] = True
        else:
            Pa[best_z_t] = 0.0
    manip = PayoffDelta(np.zeros(n), Pa - game.penalty_att, removed)
    sse = solve_manipulated(game, manip)
    return DesignSolution(manip, sse, budget.cost(manip), None, "heuristic")


def l0_greedy2(game: GameInstance, budget: L0Budget) -> DesignSolution:
    """Walk targets by decreasing |P^d|, removing each one that is in the attack set."""
    n = game.n
    removed = np.zeros(n, dtype=bool)
    left = min(budget.B, n)
    for j in np.argsort(-np.abs(game.penalty_def), kind="stable"):
        if left == 0 or removed.sum() >= n - 1:
            break
        manip = PayoffDelta(np.zeros(n), np.zeros(n), removed)
        if int(j) in solve_manipulated(game, manip).attack_set:
            removed[j] = True
            left -= 1
    manip = PayoffDelta(np.zeros(n), np.zeros(n), removed)
    sse = solve_manipulated(game, manip)
    return DesignSolution(manip, sse, budget.cost(manip), None, "heuristic")


def build_l0_milp(game: GameInstance, budget: L0Budget) -> LinearModel:
    """Indicator MILP: a_t attacked, b_t penalty zeroed, w_t removed."""
    n = game.n
    Rd, Pd, R, P = game.reward_def, game.penalty_def, game.reward_att, game.penalty_att
    # big-M constants sized per row from the payoff ranges
    m_def = Rd.max() - Pd              # d never exceeds the best defender reward
    m_max = R - min(P.min(), 0.0)      # u_t - k, with k at least the lowest penalty
    m_att = R.max() - P                # k - u_t, with u_t never below P_t
    m = LinearModel("l0")
    a = [m.add_binary(f"a_{t}") for t in range(n)]
    b = [m.add_binary(f"b_{t}") for t in range(n)]
    w = [m.add_binary(f"w_{t}") for t in range(n)]
    c = [m.add_var(f"c_{t}", 0.0, 1.0) for t in range(n)]
    u = [m.add_var(f"u_{t}", -math.inf, math.inf) for t in range(n)]
    k = m.add_var("k", -math.inf, math.inf)
    d = m.add_var("d", -math.inf, math.inf)
    for t in range(n):
        m.add_constr({d: 1, c[t]: -(Rd[t] - Pd[t]), a[t]: m_def[t]}, "<=", Pd[t] + m_def[t], f"def_{t}")
        m.add_constr({k: 1, u[t]: -1, w[t]: m_max[t]}, ">=", 0, f"kmax_{t}")
        m.add_constr({k: 1, u[t]: -1, a[t]: m_att[t]}, "<=", m_att[t], f"katt_{t}")
        # zeroing shifts u_t by at most |P_t|
        m.add_constr({u[t]: 1, c[t]: R[t] - P[t], b[t]: -P[t]}, ">=", R[t], f"ulo_{t}")
        m.add_constr({u[t]: 1, c[t]: R[t] - P[t], b[t]: P[t]}, "<=", R[t], f"uhi_{t}")
        m.add_constr({u[t]: 1, c[t]: R[t], b[t]: P[t]}, ">=", R[t] + P[t], f"uzlo_{t}")
        m.add_constr({u[t]: 1, c[t]: R[t], b[t]: -P[t]}, "<=", R[t] - P[t], f"uzhi_{t}")
        m.add_constr({b[t]: 1, a[t]: -1}, "<=", 0, f"zero_att_{t}")
        m.add_constr({w[t]: 1, a[t]: 1}, "<=", 1, f"rm_{t}")
        m.add_constr({c[t]: 1, w[t]: 1}, "<=", 1, f"rm_cov_{t}")
    m.add_constr({**{x: 1 for x in w}, **{x: 1 for x in b}}, "<=", budget.B, "budget")
    m.add_constr({x: 1 for x in a}, "==", 1, "one_target")
    m.add_constr({x: 1 for x in c}, "<=", game.resources, "resources")
    m.set_objective({d: 1}, "max")
    return m


def _l0_milp_start(game: GameInstance) -> dict:
    """The unmanipulated equilibrium, written as a feasible point of the MILP."""
    sse = origami(game)
    t_att = sse.attack_target
    u = game.reward_att - sse.coverage * (game.reward_att - game.penalty_att)
    start = {"k": float(u.max()), "d": float(sse.defender_utility)}
    for t in range(game.n):
        start.update({f"a_{t}": float(t == t_att), f"b_{t}": 0.0, f"w_{t}": 0.0,
                      f"c_{t}": float(sse.coverage[t]), f"u_{t}": float(u[t])})
    return start


def solve_l0_milp(game: GameInstance, budget: L0Budget, rel_gap: float = 0.0,
                  node_limit: int = 10**6) -> DesignSolution:
    model = build_l0_milp(game, budget)
    res = solve_milp(model, rel_gap=rel_gap, node_limit=node_limit, start=_l0_milp_start(game))
    if res.objective is None:
        raise RuntimeError(f"L0 MILP failed: {res.status} {res.message}")
    n = game.n
    removed = np.array([round(res.values[f"w_{t}"]) == 1 for t in range(n)])
    zeroed = np.array([round(res.values[f"b_{t}"]) == 1 for t in range(n)])
    dlt = np.where(zeroed, -game.penalty_att, 0.0)
    manip = PayoffDelta(np.zeros(n), dlt, removed)
    sse = solve_manipulated(game, manip)
    return DesignSolution(manip, sse, budget.cost(manip), (res.objective, res.bound), res.status,
                          {"milp_objective": res.objective, "nodes": res.nodes})
