from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SENSES = ("<=", ">=", "==")


@dataclass
class Variable:
    name: str
    lb: float = 0.0
    ub: float = math.inf
    integer: bool = False

    @property
    def binary(self) -> bool:
        return self.integer and self.lb == 0 and self.ub == 1


@dataclass
class Constraint:
    coeffs: dict
    sense: str
    rhs: float
    name: str


@dataclass
class SolveResult:
    status: str               # optimal | infeasible | unbounded | gap_reached | limit_reached
    objective: float | None = None
    values: dict = field(default_factory=dict)
    bound: float | None = None
    gap: float | None = None
    nodes: int = 0
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status in ("optimal", "gap_reached") or (
            self.status == "limit_reached" and self.objective is not None)


class LinearModel:
    """A solver-agnostic LP/MILP: named variables, linear rows, linear objective."""

    def __init__(self, name: str = "model"):
        self.name = name
        self.variables: list[Variable] = []
        self.constraints: list[Constraint] = []
        self.objective: dict = {}
        self.sense = "max"
        self._index: dict[str, int] = {}

    def __len__(self):
        return len(self.variables)

    def index(self, name: str) -> int:
        return self._index[name]

    def add_var(self, name: str, lb: float = 0.0, ub: float = math.inf, integer: bool = False) -> str:
        if name in self._index:
            raise ValueError(f"duplicate variable {name!r}")
        if lb > ub:
            raise ValueError(f"variable {name!r} has lb > ub")
        self._index[name] = len(self.variables)
        self.variables.append(Variable(name, float(lb), float(ub), bool(integer)))
        return name

    def add_binary(self, name: str) -> str:
        return self.add_var(name, 0.0, 1.0, integer=True)

    def add_constr(self, coeffs: dict, sense: str, rhs: float, name: str | None = None) -> str:
        if sense == "=":
            sense = "=="
        if sense not in SENSES:
            raise ValueError(f"unknown relation {sense!r}")
        for v in coeffs:
            if v not in self._index:
                raise KeyError(f"constraint references undeclared variable {v!r}")
        name = name or f"r{len(self.constraints)}"
        merged = {k: float(c) for k, c in coeffs.items() if c != 0}
        self.constraints.append(Constraint(merged, sense, float(rhs), name))
        return name

    def set_objective(self, coeffs: dict, sense: str = "max"):
        if sense not in ("max", "min"):
            raise ValueError("sense must be 'max' or 'min'")
        for v in coeffs:
            if v not in self._index:
                raise KeyError(f"objective references undeclared variable {v!r}")
        self.objective = {k: float(c) for k, c in coeffs.items() if c != 0}
        self.sense = sense

    @property
    def integer_names(self) -> list[str]:
        return [v.name for v in self.variables if v.integer]

    def dense(self):
        """(A, senses, b, c, lb, ub, integer mask) with c in the model's own sense."""
        n, m = len(self.variables), len(self.constraints)
        A = np.zeros((m, n))
        b = np.zeros(m)
        senses = []
        for i, con in enumerate(self.constraints):
            for name, coef in con.coeffs.items():
                A[i, self._index[name]] += coef
            b[i] = con.rhs
            senses.append(con.sense)
        c = np.zeros(n)
        for name, coef in self.objective.items():
            c[self._index[name]] = coef
        lb = np.array([v.lb for v in self.variables])
        ub = np.array([v.ub for v in self.variables])
        integ = np.array([v.integer for v in self.variables], dtype=bool)
        return A, senses, b, c, lb, ub, integ

    def evaluate(self, values: dict) -> float:
        return sum(coef * values[name] for name, coef in self.objective.items())

    def violation(self, values: dict) -> float:
        """Largest violation of any row, bound or integrality requirement."""
        worst = 0.0
        for v in self.variables:
            x = values[v.name]
            worst = max(worst, v.lb - x, x - v.ub)
            if v.integer:
                worst = max(worst, abs(x - round(x)))
        for con in self.constraints:
            lhs = sum(coef * values[k] for k, coef in con.coeffs.items())
            if con.sense == "<=":
                worst = max(worst, lhs - con.rhs)
            elif con.sense == ">=":
                worst = max(worst, con.rhs - lhs)
            else:
                worst = max(worst, abs(lhs - con.rhs))
        return worst

    def __repr__(self):
        n_int = sum(v.integer for v in self.variables)
        return (f"LinearModel({self.name!r}, vars={len(self.variables)} ({n_int} integer), "
                f"rows={len(self.constraints)}, sense={self.sense})")
