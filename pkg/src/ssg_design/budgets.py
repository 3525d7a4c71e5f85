"""Budget specifications and the common result type of every designer."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .game import PayoffDelta, SseSolution

BUDGET_TOL = 1e-9


def _vec(x, n=None, name="vector"):
    a = np.array(x, dtype=float).reshape(-1)
    if n is not None and a.shape != (n,):
        raise ValueError(f"{name} must have length {n}")
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class L1Budget:
    """Weighted L1 budget: sum_j mu_j |eps_j| + theta_j |delta_j| <= B."""

    B: float
    mu: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "B", float(self.B))
        object.__setattr__(self, "mu", _vec(self.mu, name="mu"))
        object.__setattr__(self, "theta", _vec(self.theta, len(self.mu), "theta"))
        if self.B < 0:
            raise ValueError("budget must be nonnegative")
        if np.any(self.mu <= 0) or np.any(self.theta <= 0):
            raise ValueError("weights must be positive")

    @classmethod
    def uniform(cls, B: float, n: int) -> "L1Budget":
        return cls(B, np.ones(n), np.ones(n))

    @property
    def unit_weights(self) -> bool:
        return bool(np.all(self.mu == 1) and np.all(self.theta == 1))

    def cost(self, manip: PayoffDelta) -> float:
        return manip.weighted_l1(self.mu, self.theta)

    def to_dict(self) -> dict:
        return {"B": self.B, "mu": self.mu.tolist(), "theta": self.theta.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "L1Budget":
        return cls(d["B"], d["mu"], d["theta"])


@dataclass(frozen=True)
class L0Budget:
    """Number of targets whose attacker penalty may be changed."""

    B: int

    def __post_init__(self):
        if int(self.B) != self.B or self.B < 0:
            raise ValueError("L0 budget must be a nonnegative integer")
        object.__setattr__(self, "B", int(self.B))

    def cost(self, manip: PayoffDelta) -> int:
        changed = manip.removed | (np.abs(manip.delta) > 0) | (np.abs(manip.eps) > 0)
        return int(changed.sum())

    def to_dict(self) -> dict:
        return {"B": self.B}

    @classmethod
    def from_dict(cls, d: dict) -> "L0Budget":
        return cls(d["B"])


@dataclass(frozen=True, eq=False)
class LInfBudget:
    """Per-target ranges: |eps_j| <= Br_j and |delta_j| <= Bp_j."""

    Br: np.ndarray
    Bp: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "Br", _vec(self.Br, name="Br"))
        object.__setattr__(self, "Bp", _vec(self.Bp, len(self.Br), "Bp"))
        if np.any(self.Br < 0) or np.any(self.Bp < 0):
            raise ValueError("ranges must be nonnegative")

    def admits(self, manip: PayoffDelta, tol: float = BUDGET_TOL) -> bool:
        return bool(np.all(np.abs(manip.eps) <= self.Br + tol)
                    and np.all(np.abs(manip.delta) <= self.Bp + tol)
                    and not manip.removed.any())

    def to_dict(self) -> dict:
        return {"Br": self.Br.tolist(), "Bp": self.Bp.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "LInfBudget":
        return cls(d["Br"], d["Bp"])


@dataclass(frozen=True, eq=False)
class DesignSolution:
    """A manipulation, the SSE it induces, and optionally proven bounds."""

    delta: PayoffDelta
    sse: SseSolution
    budget_used: float
    bound_certificate: tuple | None = None
    status: str = "optimal"
    info: dict = field(default_factory=dict)

    @property
    def value(self) -> float:
        return self.sse.defender_utility

    def to_dict(self) -> dict:
        d = self.delta.to_dict()
        return {
            "value": self.value,
            "coverage": self.sse.coverage.tolist(),
            "epsilon": d["epsilon"],
            "delta": d["delta"],
            "removed": d["removed"],
            "attack_target": self.sse.attack_target,
            "bounds": list(self.bound_certificate) if self.bound_certificate else None,
            "status": self.status,
        }
