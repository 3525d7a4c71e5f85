"""Random instances and the experiment runner.

Instances come from a fixed generator (xoshiro256** seeded through
splitmix64) so the same seed yields the same games in any implementation.
"""
from __future__ import annotations

import csv
import json
import math
import os
import time
from dataclasses import asdict, dataclass, field

from .budgets import L0Budget, L1Budget, LInfBudget
from .game import GameInstance

PRNG_NAME = "xoshiro256**/splitmix64 v1"
_MASK = (1 << 64) - 1
CSV_HEADER = ["norm", "n", "trial", "seed", "algorithm", "value", "gap",
              "lower_bound", "upper_bound", "status", "wall_ms"]
NORMS = ("l1", "l0", "linf")


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & _MASK


class Xoshiro256:
    """xoshiro256** with its state filled from splitmix64(seed)."""

    def __init__(self, seed: int):
        s = seed & _MASK
        state = []
        for _ in range(4):
            s = (s + 0x9E3779B97F4A7C15) & _MASK
            z = s
            z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
            z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
            state.append(z ^ (z >> 31))
        self.s = state

    def next_u64(self) -> int:
        s = self.s
        result = (_rotl((s[1] * 5) & _MASK, 7) * 9) & _MASK
        t = (s[1] << 17) & _MASK
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def integer(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] by rejection sampling."""
        span = hi - lo + 1
        if span <= 0:
            raise ValueError("empty range")
        limit = (1 << 64) - ((1 << 64) % span)
        while True:
            x = self.next_u64()
            if x < limit:
                return lo + x % span

    def integers(self, lo: int, hi: int, count: int) -> list[int]:
        return [self.integer(lo, hi) for _ in range(count)]


def gen_instance(n: int, seed: int, norm: str, resources: float = 1.0):
    """Random game plus budget: payoffs in [1, 2n], budgets and weights in [1, 4n]."""
    if n < 1:
        raise ValueError("n must be positive")
    if norm not in NORMS:
        raise ValueError(f"norm must be one of {NORMS}")
    rng = Xoshiro256(seed)
    Rd = rng.integers(1, 2 * n, n)
    Pd = [-x for x in rng.integers(1, 2 * n, n)]
    Ra = rng.integers(1, 2 * n, n)
    Pa = [-x for x in rng.integers(1, 2 * n, n)]
    game = GameInstance(Rd, Pd, Ra, Pa, resources)
    if norm == "l1":
        B = rng.integer(1, 4 * n)
        budget = L1Budget(B, rng.integers(1, 4 * n, n), rng.integers(1, 4 * n, n))
    elif norm == "l0":
        budget = L0Budget(n // 2)
    else:
        budget = LInfBudget(rng.integers(1, 4 * n, n), rng.integers(1, 4 * n, n))
    return game, budget


# --- instance files ---------------------------------------------------------

def budget_from_dict(norm: str, d: dict):
    return {"l1": L1Budget, "l0": L0Budget, "linf": LInfBudget}[norm].from_dict(d)


def instance_to_dict(game: GameInstance, budgets: dict) -> dict:
    out = game.to_dict()
    out["budget"] = {norm: b.to_dict() for norm, b in budgets.items()}
    return out


def load_instance(path: str, norm: str | None = None):
    """Read a game and, when ``norm`` is given, its budget of that kind."""
    with open(path) as fh:
        data = json.load(fh)
    game = GameInstance.from_dict(data)
    if norm is None:
        return game, None
    try:
        raw = data["budget"][norm]
    except KeyError:
        raise ValueError(f"instance has no {norm!r} budget") from None
    return game, budget_from_dict(norm, raw)


def save_instance(path: str, game: GameInstance, budgets: dict):
    with open(path, "w") as fh:
        json.dump(instance_to_dict(game, budgets), fh, indent=2)
        fh.write("\n")


# --- solver registry --------------------------------------------------------

def run_algorithm(norm: str, algorithm: str, game, budget, rho0=None, eta=0.05,
                  rel_gap=0.01, node_limit=10**6):
    """Dispatch to a designer by name. Returns a DesignSolution."""
    from . import l0, l1, linf
    if norm == "l1":
        disc = None
        if algorithm in ("bnb", "milp"):
            rho = rho0 if rho0 is not None else l1.default_rho0(game)
            disc = l1.Discretization.for_budget(game, budget, rho)
        table = {
            "bnb": lambda: l1.solve_l1_bnb(game, budget, disc, rel_gap=rel_gap, node_limit=node_limit),
            "milp": lambda: l1.solve_l1_milp(game, budget, disc, rel_gap=rel_gap, node_limit=node_limit),
            "ptas": lambda: l1.solve_l1_ptas(game, budget, eta),
            "greedy": lambda: l1.solve_l1_greedy(game, budget),
        }
    elif norm == "l0":
        table = {
            "l0": lambda: l0.solve_l0(game, budget),
            "greedy1": lambda: l0.l0_greedy1(game, budget),
            "greedy2": lambda: l0.l0_greedy2(game, budget),
            "milp": lambda: l0.solve_l0_milp(game, budget, rel_gap=rel_gap, node_limit=node_limit),
        }
    elif norm == "linf":
        table = {"linf": lambda: linf.solve_linf(game, budget)}
    else:
        raise ValueError(f"unknown norm {norm!r}")
    algorithm = ALIASES.get(algorithm, algorithm)
    if algorithm not in table:
        raise ValueError(f"unknown algorithm {algorithm!r} for {norm}; choose from {sorted(table)}")
    return table[algorithm]()


ALGORITHMS = {"l1": ("bnb", "milp", "ptas", "greedy"), "l0": ("l0", "greedy1", "greedy2", "milp"),
              "linf": ("linf",)}
# function-style names are accepted too
ALIASES = {"solve_l1_bnb": "bnb", "solve_l1_milp": "milp", "solve_l1_ptas": "ptas",
           "solve_l1_greedy": "greedy", "solve_l0": "l0", "l0_greedy1": "greedy1",
           "l0_greedy2": "greedy2", "l0_milp": "milp", "solve_l0_milp": "milp", "solve_linf": "linf"}


# --- experiments ------------------------------------------------------------

@dataclass
class ExperimentConfig:
    norm: str
    sizes: list
    trials: int = 1
    seed: int = 0
    resources: str | float = 1.0          # a number, or "n/10"
    budget_rule: str = "random"           # "random", or "half" for L0 (B = n/2)
    algorithms: list = field(default_factory=list)
    reference: str | None = None          # algorithm the gap is measured against
    output: str = "results.csv"
    rho0: float | None = None
    eta: float = 0.05
    rel_gap: float = 0.01
    node_limit: int = 10**6
    instances: list = field(default_factory=list)   # explicit instance files, run as trial 0..

    def __post_init__(self):
        if self.norm not in NORMS:
            raise ValueError(f"norm must be one of {NORMS}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not self.algorithms:
            self.algorithms = list(ALGORITHMS[self.norm])
        if self.reference is None:
            self.reference = self.algorithms[0]
        if self.reference not in self.algorithms:
            raise ValueError("reference algorithm must be one of the algorithms")
        if self.budget_rule not in ("random", "half"):
            raise ValueError("budget_rule must be 'random' or 'half'")

    @classmethod
    def from_file(cls, path: str) -> "ExperimentConfig":
        with open(path) as fh:
            data = json.load(fh)
        base = os.path.dirname(os.path.abspath(path))
        cfg = cls(**data)
        cfg.instances = [os.path.normpath(os.path.join(base, p)) for p in cfg.instances]
        cfg.output = os.path.normpath(os.path.join(base, cfg.output))
        return cfg

    def to_dict(self) -> dict:
        return asdict(self)

    def resources_for(self, n: int) -> float:
        if isinstance(self.resources, str):
            if self.resources != "n/10":
                raise ValueError("resources must be a number or 'n/10'")
            return n / 10
        return float(self.resources)

    def trial_seed(self, n: int, trial: int) -> int:
        return (self.seed * 1_000_003 + n * 1009 + trial) & _MASK


def relative_gap_to(value: float, reference: float) -> float:
    """(value - reference) / |reference| after rounding both to 12 decimals."""
    v, ref = round(value, 12), round(reference, 12)
    if abs(ref) < 1e-12:
        return v - ref
    return (v - ref) / abs(ref)


def _fmt(x):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, float):
        return "%.17g" % x
    return str(x)


def _cases(cfg: ExperimentConfig):
    if cfg.instances:
        for trial, path in enumerate(cfg.instances):
            game, budget = load_instance(path, cfg.norm)
            yield game.n, trial, -1, game, budget
        return
    for n in cfg.sizes:
        for trial in range(cfg.trials):
            seed = cfg.trial_seed(n, trial)
            game, budget = gen_instance(n, seed, cfg.norm, cfg.resources_for(n))
            if cfg.norm == "l0" and cfg.budget_rule == "half":
                budget = L0Budget(n // 2)
            yield n, trial, seed, game, budget


def run_experiment(cfg: ExperimentConfig, out_path: str | None = None) -> list[dict]:
    """Run every (size, trial, algorithm); append rows to the CSV as trials finish."""
    path = out_path or cfg.output
    rows = []
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        fh.flush()
        for n, trial, seed, game, budget in _cases(cfg):
            results = {}
            for alg in cfg.algorithms:
                t0 = time.perf_counter()
                try:
                    sol = run_algorithm(cfg.norm, alg, game, budget, rho0=cfg.rho0, eta=cfg.eta,
                                        rel_gap=cfg.rel_gap, node_limit=cfg.node_limit)
                    lo, hi = sol.bound_certificate if sol.bound_certificate else (None, None)
                    results[alg] = dict(value=sol.value, lower_bound=lo, upper_bound=hi, status=sol.status)
                except Exception as exc:          # a failed trial is recorded, never fatal
                    results[alg] = dict(value=None, lower_bound=None, upper_bound=None,
                                        status=f"error: {type(exc).__name__}: {exc}")
                results[alg]["wall_ms"] = (time.perf_counter() - t0) * 1000
            ref = results[cfg.reference]["value"]
            trial_rows = []
            for alg in cfg.algorithms:
                r = results[alg]
                gap = None if r["value"] is None or ref is None else relative_gap_to(r["value"], ref)
                row = dict(norm=cfg.norm, n=n, trial=trial, seed=seed, algorithm=alg, value=r["value"],
                           gap=gap, lower_bound=r["lower_bound"], upper_bound=r["upper_bound"],
                           status=r["status"], wall_ms=round(r["wall_ms"], 3))
                trial_rows.append(row)
                writer.writerow([_fmt(row[k]) for k in CSV_HEADER])
            fh.flush()
            rows.extend(trial_rows)
    return rows


def read_results(path: str) -> list[dict]:
    """Parse a results CSV back into typed rows."""
    out = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            row = dict(rec)
            for k in ("n", "trial", "seed"):
                row[k] = int(row[k])
            for k in ("value", "gap", "lower_bound", "upper_bound", "wall_ms"):
                row[k] = float(row[k]) if row[k] != "" else None
            out.append(row)
    return out
