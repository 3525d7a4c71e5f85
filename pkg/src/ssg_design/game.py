"""Fixed-payoff security games and strong Stackelberg equilibrium solvers.

Targets are indexed from 0. Every solver returns an :class:`SseSolution`
whose attack target is chosen in the defender's favour among the attacker's
best responses.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# relative tolerance for attack-set membership
ATTACK_SET_RTOL = 1e-6
SIGN_TOL = 1e-9


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class GameInstance:
    """Payoffs of an n-target security game plus the defender's resource count."""

    reward_def: np.ndarray
    penalty_def: np.ndarray
    reward_att: np.ndarray
    penalty_att: np.ndarray
    resources: float = 1.0

    def __post_init__(self):
        for name in ("reward_def", "penalty_def", "reward_att", "penalty_att"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        object.__setattr__(self, "resources", float(self.resources))
        n = len(self.reward_def)
        if n < 1:
            raise ValueError("a game needs at least one target")
        if any(len(v) != n for v in (self.penalty_def, self.reward_att, self.penalty_att)):
            raise ValueError("payoff vectors must have identical length")
        if self.resources < 0:
            raise ValueError("resources must be nonnegative")
        if np.any(self.reward_def < 0) or np.any(self.reward_att < 0):
            raise ValueError("rewards must be >= 0")
        if np.any(self.penalty_def > 0) or np.any(self.penalty_att > 0):
            raise ValueError("penalties must be <= 0")
        if not all(np.all(np.isfinite(v)) for v in
                   (self.reward_def, self.penalty_def, self.reward_att, self.penalty_att)):
            raise ValueError("payoffs must be finite")

    @property
    def n(self) -> int:
        return len(self.reward_def)

    @property
    def span_att(self) -> np.ndarray:
        """R^a - P^a per target."""
        return self.reward_att - self.penalty_att

    @property
    def span_def(self) -> np.ndarray:
        return self.reward_def - self.penalty_def

    def replace(self, **changes) -> "GameInstance":
        kw = dict(reward_def=self.reward_def, penalty_def=self.penalty_def,
                  reward_att=self.reward_att, penalty_att=self.penalty_att,
                  resources=self.resources)
        kw.update(changes)
        return GameInstance(**kw)

    def subgame(self, keep) -> "GameInstance":
        keep = np.asarray(keep, dtype=int)
        return GameInstance(self.reward_def[keep], self.penalty_def[keep],
                            self.reward_att[keep], self.penalty_att[keep], self.resources)

    def to_dict(self) -> dict:
        return {
            "reward_def": self.reward_def.tolist(),
            "penalty_def": self.penalty_def.tolist(),
            "reward_att": self.reward_att.tolist(),
            "penalty_att": self.penalty_att.tolist(),
            "resources": self.resources,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GameInstance":
        return cls(data["reward_def"], data["penalty_def"], data["reward_att"],
                   data["penalty_att"], data.get("resources", 1.0))

    def __repr__(self):
        return (f"GameInstance(n={self.n}, r={self.resources:g}, "
                f"Rd={self.reward_def.tolist()}, Pd={self.penalty_def.tolist()}, "
                f"Ra={self.reward_att.tolist()}, Pa={self.penalty_att.tolist()})")


@dataclass(frozen=True, eq=False)
class SseSolution:
    coverage: np.ndarray
    attack_set: tuple
    attack_target: int
    attacker_value: float
    defender_utility: float

    @property
    def value(self) -> float:
        return self.defender_utility


@dataclass(frozen=True, eq=False)
class PayoffDelta:
    """Signed changes to the attacker's reward (``eps``) and penalty (``delta``).

    ``removed`` marks targets whose penalty is driven to minus infinity; such
    targets drop out of the game entirely.
    """

    eps: np.ndarray
    delta: np.ndarray
    removed: np.ndarray = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "eps", _frozen(self.eps))
        object.__setattr__(self, "delta", _frozen(self.delta))
        if self.removed is None:
            removed = np.zeros(len(self.eps), dtype=bool)
        else:
            removed = np.array(self.removed, dtype=bool).reshape(-1)
        removed.setflags(write=False)
        object.__setattr__(self, "removed", removed)
        if not (len(self.eps) == len(self.delta) == len(self.removed)):
            raise ValueError("delta vectors must have identical length")

    @classmethod
    def zeros(cls, n: int) -> "PayoffDelta":
        return cls(np.zeros(n), np.zeros(n))

    @property
    def n(self) -> int:
        return len(self.eps)

    def weighted_l1(self, mu, theta) -> float:
        return float(np.sum(np.asarray(mu) * np.abs(self.eps) + np.asarray(theta) * np.abs(self.delta)))

    def to_dict(self) -> dict:
        return {
            "epsilon": self.eps.tolist(),
            "delta": [None if rem else d for d, rem in zip(self.delta.tolist(), self.removed)],
            "removed": [int(j) for j in np.flatnonzero(self.removed)],
        }


def expected_utilities(game: GameInstance, cov) -> tuple[np.ndarray, np.ndarray]:
    """Defender and attacker expected utility of attacking each target."""
    c = np.asarray(cov, dtype=float)
    if c.shape != (game.n,):
        raise ValueError(f"coverage has shape {c.shape}, expected ({game.n},)")
    u_def = c * game.reward_def + (1 - c) * game.penalty_def
    u_att = c * game.penalty_att + (1 - c) * game.reward_att
    return u_def, u_att


def attack_set(game: GameInstance, cov, tol: float = 0.0) -> tuple:
    if tol < 0:
        raise ValueError("tol must be >= 0")
    _, u_att = expected_utilities(game, cov)
    best = u_att.max()
    return tuple(int(j) for j in np.flatnonzero(u_att >= best - tol))


def attack_set_coverage(game: GameInstance, targets, r: float | None = None) -> tuple[float, np.ndarray]:
    """Solve the indifference system for a fixed attack set.

    Returns the common attacker utility ``M`` and the coverage of each target
    in ``targets`` (same order). Coverage is not clipped to [0, 1].
    """
    idx = np.asarray(list(targets), dtype=int)
    if idx.size == 0:
        raise ValueError("attack set must be nonempty")
    r = game.resources if r is None else float(r)
    R = game.reward_att[idx]
    span = R - game.penalty_att[idx]
    if np.any(span <= 0):
        raise ValueError("attack set contains a target with R^a = P^a; its inverse span is unbounded")
    E = 1.0 / span
    total = E.sum()
    if total == 0 or not np.isfinite(total):
        raise ValueError("singular attack-set system")
    M = (np.dot(R, E) - r) / total
    return float(M), E * (R - M)


def _attack_order(game: GameInstance) -> np.ndarray:
    # decreasing R^a, ties by original index
    return np.argsort(-game.reward_att, kind="stable")


def sse_from_coverage(game: GameInstance, cov) -> SseSolution:
    cov = np.clip(np.asarray(cov, dtype=float), 0.0, 1.0)
    u_def, u_att = expected_utilities(game, cov)
    M = float(u_att.max())
    members = np.flatnonzero(u_att >= M - ATTACK_SET_RTOL * max(1.0, abs(M)))
    t = int(members[np.argmax(u_def[members])])
    cov.setflags(write=False)
    return SseSolution(cov, tuple(int(j) for j in members), t, M, float(u_def[t]))


def _coverage_at_level(R, P, level):
    span = R - P
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.where(span > 0, (R - level) / span, 0.0)
    return np.clip(c, 0.0, 1.0)


def _cover_flat(game: GameInstance, cov: np.ndarray, level: float) -> np.ndarray:
    """Hand unused coverage to the best flat target (R^a = P^a = 0) at the attacker's level.

    Coverage there does not change the attacker's utility, so the defender is
    free to protect whichever flat target it would rather see attacked.
    """
    flat = np.flatnonzero((game.reward_att == 0) & (game.penalty_att == 0))
    left = game.resources - cov.sum()
    if flat.size == 0 or left <= 1e-12 or level > ATTACK_SET_RTOL:
        return cov
    c = min(1.0, left)
    gain = c * game.reward_def[flat] + (1 - c) * game.penalty_def[flat]
    cov[flat[int(np.argmax(gain))]] = c
    return cov


def origami(game: GameInstance) -> SseSolution:
    """ORIGAMI: grow the attack set in decreasing R^a order.

    Each step adds coverage until the current attack set is as unattractive as
    the next target. Stops when resources run out (exact solve of the
    indifference system) or when a target would need more than full coverage.
    """
    order = _attack_order(game)
    R = game.reward_att[order]
    P = game.penalty_att[order]
    span = R - P
    n, r = game.n, game.resources
    level = None
    size = n
    for l in range(1, n + 1):
        nxt = R[l] if l < n else -math.inf
        floor = P[:l].max()
        stop = max(nxt, floor)
        live = span[:l] > 0
        need = np.sum((R[:l][live] - stop) / span[:l][live])
        if live.any() and need >= r:
            E = 1.0 / span[:l][live]
            level = (np.dot(R[:l][live], E) - r) / E.sum()
            size = l
            break
        if floor >= nxt:
            level = floor
            size = l
            break
    cov = np.zeros(n)
    cov[order[:size]] = _coverage_at_level(R[:size], P[:size], level)
    return sse_from_coverage(game, _cover_flat(game, cov, level))


def origami_bs(game: GameInstance) -> SseSolution:
    """ORIGAMI with a binary search over the attack-set size.

    Coverage of every candidate attack set comes from the closed-form
    indifference system; the search shrinks when that coverage turns negative
    and grows while the next target is still more attractive. If the result
    asks for more than full coverage somewhere, the attacker's utility is
    capped at the largest penalty in the set.
    """
    order = _attack_order(game)
    R_all = game.reward_att[order]
    P_all = game.penalty_att[order]
    live = (R_all - P_all) > 0
    has_flat = not live.all()   # targets with R^a = P^a = 0
    pos = np.flatnonzero(live)
    R, P = R_all[pos], P_all[pos]
    m, r = len(pos), game.resources
    cov = np.zeros(game.n)
    if m == 0:
        return sse_from_coverage(game, _cover_flat(game, cov, 0.0))
    E = 1.0 / (R - P)
    cum_e = np.cumsum(E)
    cum_re = np.cumsum(R * E)
    scale = max(1.0, float(np.abs(R).max()), float(np.abs(P).max()))
    tol = 1e-12 * scale

    lo, hi = 1, m
    found = None
    for _ in range(math.ceil(math.log2(m)) + 2):
        if lo > hi:
            break
        mid = (lo + hi) // 2
        M = (cum_re[mid - 1] - r) / cum_e[mid - 1]
        if R[mid - 1] < M - tol:
            hi = mid - 1
        elif mid < m and M < R[mid] - tol:
            lo = mid + 1
        else:
            found = mid
            break
    if found is None:
        raise RuntimeError(f"ORIGAMI-BS binary search did not terminate (lo={lo}, hi={hi}, m={m})")

    level = (cum_re[found - 1] - r) / cum_e[found - 1]
    # include tied targets that sit exactly at the attacker's level
    size = found
    while size < m and R[size] >= level - tol:
        size += 1
    cap = P[:size].max()
    if level < cap:
        level = cap
    if has_flat and level < 0:
        level = 0.0
    c = _coverage_at_level(R[:size], P[:size], level)
    c[found:] = 0.0     # tied extras sit at the level; a tiny span must not inflate them
    cov[order[pos[:size]]] = c
    return sse_from_coverage(game, _cover_flat(game, cov, level))


def apply_delta(game: GameInstance, manip: PayoffDelta) -> tuple[GameInstance, np.ndarray]:
    """Apply a manipulation; removed targets are dropped.

    Returns the manipulated game and the original index of each of its targets.
    """
    if manip.n != game.n:
        raise ValueError("delta length does not match the game")
    R = game.reward_att + manip.eps
    P = game.penalty_att + manip.delta
    keep = np.flatnonzero(~manip.removed)
    if keep.size == 0:
        raise ValueError("cannot remove every target")
    R, P = R[keep], P[keep]
    if np.any(R < -SIGN_TOL) or np.any(P > SIGN_TOL):
        raise ValueError("manipulation violates R^a >= 0 >= P^a")
    R = np.maximum(R, 0.0)
    P = np.minimum(P, 0.0)
    sub = GameInstance(game.reward_def[keep], game.penalty_def[keep], R, P, game.resources)
    return sub, keep


def solve_manipulated(game: GameInstance, manip: PayoffDelta, solver=origami_bs) -> SseSolution:
    """SSE of the manipulated game, reported in the original target indexing."""
    sub, keep = apply_delta(game, manip)
    sol = solver(sub)
    cov = np.zeros(game.n)
    cov[keep] = sol.coverage
    cov.setflags(write=False)
    return SseSolution(cov, tuple(int(keep[j]) for j in sol.attack_set), int(keep[sol.attack_target]),
                       sol.attacker_value, sol.defender_utility)


def restricted_value(game: GameInstance, target: int, solver=origami_bs) -> float:
    """Best defender utility when ``target`` must be attacked, or -inf if it cannot be."""
    sol = solver(game)
    if target not in sol.attack_set:
        return -math.inf
    c = sol.coverage[target]
    return float(c * game.reward_def[target] + (1 - c) * game.penalty_def[target])
