"""Designers for a weighted L1 budget on attacker payoff changes.

The problem splits into one subproblem per candidate attack target i. In
subproblem i the defender raises i's attacker payoffs and lowers everybody
else's, then maximises the coverage of i while i stays attacked.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .budgets import L1Budget, DesignSolution
from .game import GameInstance, PayoffDelta, origami_bs, restricted_value, solve_manipulated
from .kernel import LinearModel, solve_milp

MAX_BITS = 24
VALUE_TOL = 1e-9


def _atoms(x, rho0):
    return int(math.floor(x / rho0 + 1e-9)) if math.isfinite(x) else 1 << 62


@dataclass(frozen=True)
class Discretization:
    """Changes are multiples of ``rho0``; each coordinate uses at most ``bit_width`` bits."""

    rho0: float
    bit_width: int

    def __post_init__(self):
        if not self.rho0 > 0:
            raise ValueError("rho0 must be positive")
        if self.bit_width < 0:
            raise ValueError("bit_width must be nonnegative")

    @classmethod
    def for_budget(cls, game: GameInstance, budget: L1Budget, rho0: float,
                   max_bits: int = MAX_BITS) -> "Discretization":
        """Smallest width that can express every change the budget allows."""
        if not rho0 > 0:
            raise ValueError("rho0 must be positive")
        most = 0
        for j in range(game.n):
            most = max(most, _atoms(budget.B / budget.mu[j], rho0),
                       _atoms(budget.B / budget.theta[j], rho0))
        width = most.bit_length()
        if width > max_bits:
            raise ValueError(f"budget needs {width} bits per coordinate at rho0={rho0}; "
                             f"the limit is {max_bits}, use a larger rho0")
        return cls(float(rho0), width)


def default_rho0(game: GameInstance) -> float:
    """min_i R^a_i / (4 (R^d_i - P^d_i)) over non-degenerate targets."""
    span = game.span_def
    ok = span > 0
    if not ok.any():
        raise ValueError("every target has R^d = P^d; no atomic unit can be derived")
    vals = game.reward_att[ok] / (4 * span[ok])
    rho = float(vals.min())
    if rho <= 0:
        raise ValueError("a target with zero attacker reward makes the default unit zero")
    return rho


def approximation_bound(game: GameInstance, rho0: float) -> float:
    """Additive loss of restricting changes to multiples of ``rho0``."""
    if rho0 == 0:
        return 0.0
    ok = game.reward_att > 0
    if not ok.all():
        warnings.warn("targets with zero attacker reward are left out of the bound", stacklevel=2)
    if not ok.any():
        return 0.0
    return float(np.max(2 * rho0 * game.span_def[ok] / game.reward_att[ok]))


# --- bounds -----------------------------------------------------------------

def _gm_deltas(game: GameInstance, i: int, budget: L1Budget):
    n, B = game.n, budget.B
    e1 = np.zeros(n)
    e1[i] = B / budget.mu[i]
    gm1 = PayoffDelta(e1, np.zeros(n))
    d2 = np.zeros(n)
    d2[i] = min(B / budget.theta[i], -game.penalty_att[i])
    e2 = np.zeros(n)
    e2[i] = max(0.0, B - budget.theta[i] * d2[i]) / budget.mu[i]
    gm2 = PayoffDelta(e2, d2)
    return gm1, gm2


def greedy_lower_bound(game: GameInstance, i: int, budget: L1Budget):
    """Better of the two single-target greedy manipulations of ``i``.

    Returns (value with i attacked, PayoffDelta).
    """
    best = None
    for manip in _gm_deltas(game, i, budget):
        sub = game.replace(reward_att=game.reward_att + manip.eps,
                           penalty_att=np.minimum(game.penalty_att + manip.delta, 0.0))
        val = restricted_value(sub, i)
        if best is None or val > best[0] + VALUE_TOL:
            best = (val, manip)
    return best


def overuse_game(game: GameInstance, i: int, budget: L1Budget) -> GameInstance:
    """Every coordinate moved by the full budget in the direction that favours i."""
    B = budget.B
    R = np.maximum(game.reward_att - B / budget.mu, 0.0)
    P = game.penalty_att - B / budget.theta
    R[i] = game.reward_att[i] + B / budget.mu[i]
    P[i] = min(game.penalty_att[i] + B / budget.theta[i], 0.0)
    return game.replace(reward_att=R, penalty_att=P)


def overuse_upper_bound(game: GameInstance, i: int, budget: L1Budget) -> float:
    """Upper bound on subproblem i obtained by spending B on every coordinate at once."""
    return restricted_value(overuse_game(game, i, budget), i)


# --- MILP encodings ---------------------------------------------------------

def big_m(game: GameInstance, budget: L1Budget) -> float:
    payoff = max(np.abs(game.reward_def).max(), np.abs(game.penalty_def).max(),
                 np.abs(game.reward_att).max(), np.abs(game.penalty_att).max())
    shift = budget.B / min(budget.mu.min(), budget.theta.min())
    return 4 * (payoff + shift) + 1


def _bits(model, prefix, j, atoms, width, budget_terms, weight, rho0):
    """Declare the bits of one coordinate and return their names and place values."""
    k_used = min(width, atoms.bit_length())
    names = []
    for k in range(k_used):
        names.append(model.add_binary(f"{prefix}_{j}_{k}"))
        budget_terms[names[-1]] = weight * rho0 * (1 << k)
    return names, [rho0 * (1 << k) for k in range(k_used)]


def _products(model, bits, tag, cvar):
    """Linearise a_k = bit_k * c for c in [0, 1]."""
    prods = []
    for b in bits:
        a = model.add_var(b.replace(b.split("_")[0], tag, 1), 0.0, 1.0)
        model.add_constr({a: 1, b: -1}, "<=", 0)
        model.add_constr({a: 1, cvar: -1}, "<=", 0)
        model.add_constr({a: 1, cvar: -1, b: -1}, ">=", -1)
        prods.append(a)
    return prods


def build_ap_i(game: GameInstance, i: int, budget: L1Budget, disc: Discretization) -> LinearModel:
    """Discretised subproblem i: maximise c_i over changes in multiples of rho0."""
    n, rho = game.n, disc.rho0
    R, P = game.reward_att, game.penalty_att
    D = R - P
    B = budget.B
    model = LinearModel(f"ap_{i}")
    cv = [model.add_var(f"c_{j}", 0.0, 1.0) for j in range(n)]
    cost: dict = {}
    util = []           # attacker utility of each target as a coefficient map plus constant
    for j in range(n):
        up = j == i
        a_eps = _atoms(B / budget.mu[j], rho)
        a_dlt = _atoms(B / budget.theta[j], rho)
        if up:
            a_dlt = min(a_dlt, _atoms(-P[j], rho))
        else:
            a_eps = min(a_eps, _atoms(R[j], rho))
        y, py = _bits(model, "y", j, a_eps, disc.bit_width, cost, budget.mu[j], rho)
        z, pz = _bits(model, "z", j, a_dlt, disc.bit_width, cost, budget.theta[j], rho)
        alpha = _products(model, y, "a", cv[j])
        beta = _products(model, z, "b", cv[j])
        s = 1.0 if up else -1.0
        expr = {cv[j]: -D[j]}
        for name, v in zip(y, py):
            expr[name] = s * v
        for name, v in zip(alpha, py):
            expr[name] = -s * v
        for name, v in zip(beta, pz):
            expr[name] = s * v
        util.append((expr, R[j]))
        # sign feasibility of the manipulated payoffs
        if y and not up:
            model.add_constr(dict(zip(y, py)), "<=", R[j], f"signR_{j}")
        if z and up:
            model.add_constr(dict(zip(z, pz)), "<=", -P[j], f"signP_{j}")
    ei, ri = util[i]
    for j in range(n):
        if j == i:
            continue
        ej, rj = util[j]
        row = dict(ei)
        for k, v in ej.items():
            row[k] = row.get(k, 0.0) - v
        model.add_constr(row, ">=", rj - ri, f"att_{j}")
    if cost:
        model.add_constr(cost, "<=", B, "budget")
    model.add_constr({c: 1 for c in cv}, "<=", game.resources, "resources")
    model.set_objective({cv[i]: 1.0}, "max")
    return model


def build_single_milp(game: GameInstance, budget: L1Budget, disc: Discretization) -> LinearModel:
    """One model over all attack targets; ``g_j`` selects the attacked target."""
    n, rho = game.n, disc.rho0
    R, P = game.reward_att, game.penalty_att
    Rd, Pd = game.reward_def, game.penalty_def
    D = R - P
    B = budget.B
    Z = big_m(game, budget)
    model = LinearModel("single")
    cv = [model.add_var(f"c_{j}", 0.0, 1.0) for j in range(n)]
    gv = [model.add_binary(f"g_{j}") for j in range(n)]
    u = model.add_var("u", -math.inf, math.inf)
    d = model.add_var("d", -math.inf, math.inf)
    cost: dict = {}
    for j in range(n):
        a_e = _atoms(B / budget.mu[j], rho)
        a_d = _atoms(B / budget.theta[j], rho)
        parts = {
            "yu": (a_e, budget.mu[j], 1.0, -1.0),                    # raise R
            "yd": (min(a_e, _atoms(R[j], rho)), budget.mu[j], -1.0, 1.0),
            "zu": (min(a_d, _atoms(-P[j], rho)), budget.theta[j], 0.0, 1.0),  # raise P
            "zd": (a_d, budget.theta[j], 0.0, -1.0),
        }
        expr = {cv[j]: -D[j]}
        for tag, (atoms, w, s_bit, s_prod) in parts.items():
            bits, place = _bits(model, tag, j, atoms, disc.bit_width, cost, w, rho)
            prods = _products(model, bits, "p" + tag, cv[j])
            for b, p, v in zip(bits, prods, place):
                if s_bit:
                    expr[b] = s_bit * v
                expr[p] = s_prod * v
                gate = {b: 1, gv[j]: -1} if tag.endswith("u") else {b: 1, gv[j]: 1}
                model.add_constr(gate, "<=", 0 if tag.endswith("u") else 1)
            if tag == "yd" and bits:
                model.add_constr(dict(zip(bits, place)), "<=", R[j], f"signR_{j}")
            if tag == "zu" and bits:
                model.add_constr(dict(zip(bits, place)), "<=", -P[j], f"signP_{j}")
        # u >= U_j and U_j >= u - (1 - g_j) Z
        row = {u: 1.0}
        for k, v in expr.items():
            row[k] = -v
        model.add_constr(row, ">=", R[j], f"umax_{j}")
        row2 = dict(expr)
        row2[u] = -1.0
        row2[gv[j]] = -Z
        model.add_constr(row2, ">=", -R[j] - Z, f"uatt_{j}")
        model.add_constr({d: 1.0, cv[j]: -(Rd[j] - Pd[j]), gv[j]: Z}, "<=", Pd[j] + Z, f"def_{j}")
    model.add_constr({g: 1 for g in gv}, "==", 1, "one_target")
    if cost:
        model.add_constr(cost, "<=", B, "budget")
    model.add_constr({c: 1 for c in cv}, "<=", game.resources, "resources")
    model.set_objective({d: 1.0}, "max")
    return model


def decode_delta(game: GameInstance, values: dict, rho0: float) -> PayoffDelta:
    """Read eps/delta back from the bit variables of either encoding."""
    n = game.n
    eps, dlt = np.zeros(n), np.zeros(n)
    for name, v in values.items():
        parts = name.split("_")
        if len(parts) != 3 or parts[0] not in ("y", "z", "yu", "yd", "zu", "zd"):
            continue
        if round(v) != 1:
            continue
        j, k = int(parts[1]), int(parts[2])
        step = rho0 * (1 << k)
        tag = parts[0]
        if tag == "yu":
            eps[j] += step
        elif tag == "yd":
            eps[j] -= step
        elif tag == "zu":
            dlt[j] += step
        elif tag == "zd":
            dlt[j] -= step
        elif tag == "y":
            eps[j] += step
        else:
            dlt[j] += step
    return PayoffDelta(eps, dlt)


def _ap_delta(game, i, values, rho0):
    raw = decode_delta(game, values, rho0)
    sign = -np.ones(game.n)
    sign[i] = 1.0
    return PayoffDelta(raw.eps * sign, raw.delta * sign)


def _design(game, budget, manip, certificate=None, status="optimal", info=None):
    sse = solve_manipulated(game, manip)
    return DesignSolution(manip, sse, budget.cost(manip), certificate, status, info or {})


# --- solvers ----------------------------------------------------------------

def solve_l1_greedy(game: GameInstance, budget: L1Budget) -> DesignSolution:
    """Best single-target greedy manipulation over all targets."""
    best = None
    for i in range(game.n):
        for manip in _gm_deltas(game, i, budget):
            sol = _design(game, budget, manip, status="heuristic")
            if best is None or sol.value > best.value + VALUE_TOL:
                best = sol
    return best


def solve_l1_bnb(game: GameInstance, budget: L1Budget, disc: Discretization | None = None,
                 rel_gap: float = 0.01, node_limit: int = 10**6, prune: bool = True) -> DesignSolution:
    """Branch-and-bound over the per-target subproblems.

    Greedy manipulations give a global lower bound; a subproblem whose
    overuse bound cannot beat it is skipped. The rest are solved as MILPs
    with a cut forcing improvement over the current lower bound.
    """
    if disc is None:
        disc = Discretization.for_budget(game, budget, default_rho0(game))
    n = game.n
    Rd, Pd = game.reward_def, game.penalty_def
    lbs, ubs, witnesses = [], [], []
    best = None
    for i in range(n):
        lb, manip = greedy_lower_bound(game, i, budget)
        lbs.append(lb)
        ubs.append(overuse_upper_bound(game, i, budget))
        sol = _design(game, budget, manip)
        witnesses.append(sol)
        if best is None or sol.value > best.value + VALUE_TOL:
            best = sol
    global_lb = max(max(lbs), best.value)
    order = sorted(range(n), key=lambda k: (-lbs[k], k))
    pruned, solved, statuses = [], [], []
    # a solved grid subproblem bounds its continuous twin up to the grid loss
    slack = approximation_bound(game, disc.rho0) if (game.reward_att > 0).all() else math.inf
    caps = list(ubs)
    for i in order:
        if prune and ubs[i] <= global_lb + VALUE_TOL:
            pruned.append(i)
            continue
        model = build_ap_i(game, i, budget, disc)
        span = Rd[i] - Pd[i]
        need = 0.0
        if prune and span > 0:
            need = (global_lb - Pd[i]) / span
            if need > 1 + 1e-12:
                pruned.append(i)
                continue
            if need > 0:
                model.add_constr({f"c_{i}": 1.0}, ">=", need, "improve")
        res = solve_milp(model, rel_gap=rel_gap, node_limit=node_limit)
        solved.append(i)
        statuses.append(res.status)
        if res.bound is not None:
            grid_cap = Pd[i] + span * min(1.0, max(0.0, res.bound))
        elif res.status == "infeasible":
            grid_cap = Pd[i] + span * min(1.0, max(0.0, need))
        else:
            grid_cap = math.inf
        caps[i] = min(caps[i], grid_cap + slack)
        if res.objective is None:
            continue
        sol = _design(game, budget, _ap_delta(game, i, res.values, disc.rho0))
        if sol.value > best.value + VALUE_TOL:
            best = sol
        global_lb = max(global_lb, sol.value)
    upper = float(max([best.value] + caps))
    if any(s == "limit_reached" for s in statuses):
        status = "limit_reached"
    elif any(s == "gap_reached" for s in statuses):
        status = "gap_reached"
    else:
        status = "optimal"
    info = {"pruned": sorted(pruned), "solved": solved, "lower_bounds": lbs, "upper_bounds": caps,
            "rho0": disc.rho0, "bit_width": disc.bit_width}
    return DesignSolution(best.delta, best.sse, best.budget_used, (best.value, upper), status, info)


def solve_l1_milp(game: GameInstance, budget: L1Budget, disc: Discretization | None = None,
                  rel_gap: float = 0.01, node_limit: int = 10**6) -> DesignSolution:
    """Solve the single-model encoding directly."""
    if disc is None:
        disc = Discretization.for_budget(game, budget, default_rho0(game))
    res = solve_milp(build_single_milp(game, budget, disc), rel_gap=rel_gap, node_limit=node_limit)
    if res.objective is None:
        raise RuntimeError(f"single MILP failed: {res.status} {res.message}")
    manip = decode_delta(game, res.values, disc.rho0)
    return _design(game, budget, manip, status=res.status,
                   info={"milp_objective": res.objective, "milp_bound": res.bound})


def _ptas_check(game: GameInstance, budget: L1Budget, eta: float):
    if eta <= 0:
        raise ValueError("eta must be positive")
    if not budget.unit_weights:
        raise ValueError("the pairwise search requires unit weights")
    limit = min(np.abs(game.penalty_att).min(), game.reward_att.min())
    if budget.B > limit + 1e-12:
        raise ValueError(f"budget {budget.B} exceeds min(|P^a|, R^a) = {limit}")


def ptas_steps(B: float, eta: float) -> list[float]:
    steps = [k * eta for k in range(int(math.floor(B / eta + 1e-9)) + 1)]
    if B - steps[-1] > 1e-12:
        steps.append(B)
    return [min(s, B) for s in steps]


def solve_l1_ptas(game: GameInstance, budget: L1Budget, eta: float) -> DesignSolution:
    """Search budget splits between an attack target and one other target."""
    _ptas_check(game, budget, eta)
    n, B = game.n, budget.B
    R, P = game.reward_att, game.penalty_att
    best_val, best_manip = -math.inf, None

    def consider(manip):
        nonlocal best_val, best_manip
        sub = game.replace(reward_att=R + manip.eps, penalty_att=np.minimum(P + manip.delta, 0.0))
        val = origami_bs(sub).value
        if val > best_val + VALUE_TOL:
            best_val, best_manip = val, manip

    consider(PayoffDelta.zeros(n))
    for i in range(n):
        for on_reward in (True, False):
            e, d = np.zeros(n), np.zeros(n)
            (e if on_reward else d)[i] = B
            consider(PayoffDelta(e, d))
        for j in range(n):
            if j == i:
                continue
            for s in ptas_steps(B, eta):
                for i_reward in (True, False):
                    for j_reward in (True, False):
                        e, d = np.zeros(n), np.zeros(n)
                        (e if i_reward else d)[i] += s
                        (e if j_reward else d)[j] -= B - s
                        consider(PayoffDelta(e, d))
    return _design(game, budget, best_manip, status="approximate",
                   info={"eta": eta, "guarantee": approximation_bound(game, eta)})
