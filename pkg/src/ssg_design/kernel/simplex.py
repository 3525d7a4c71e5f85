"""Dense two-phase tableau simplex.

Entering columns follow Dantzig's rule until a run of degenerate pivots is
seen, after which Bland's smallest-index rule takes over until the objective
moves again. Leaving rows break ratio ties by the smallest basic index.
"""
from __future__ import annotations

import math

import numpy as np

from .model import LinearModel, SolveResult

EPS = 1e-9
FEAS_TOL = 1e-7
DEGENERATE_RUN = 30


class CompiledLP:
    """Dense arrays of a model, in maximisation form, reused across solves."""

    def __init__(self, model: LinearModel):
        A, senses, b, c, lb, ub, integ = model.dense()
        self.model = model
        self.A = A
        self.senses = senses
        self.b = b
        self.sign = 1.0 if model.sense == "max" else -1.0
        self.c = self.sign * c
        self.lb = lb
        self.ub = ub
        self.integer = integ
        self.names = [v.name for v in model.variables]


def _pivot(T, row, col):
    T[row] /= T[row, col]
    colv = T[:, col].copy()
    colv[row] = 0.0
    T -= np.outer(colv, T[row])


def _choose_entering(obj_row, allowed, bland):
    cand = np.flatnonzero((obj_row < -EPS) & allowed)
    if cand.size == 0:
        return -1
    if bland:
        return int(cand[0])
    return int(cand[np.argmin(obj_row[cand])])


def _choose_leaving(T, col, basis):
    m = T.shape[0] - 1
    colv = T[:m, col]
    pos = np.flatnonzero(colv > EPS)
    if pos.size == 0:
        return -1
    ratios = T[pos, -1] / colv[pos]
    best = ratios.min()
    ties = pos[ratios <= best + 1e-12 * max(1.0, abs(best))]
    return int(ties[np.argmin(np.asarray(basis)[ties])])


def _run(T, basis, allowed, max_iter):
    """Optimise the tableau in place. Returns 'optimal', 'unbounded' or 'limit'."""
    degenerate = 0
    for _ in range(max_iter):
        col = _choose_entering(T[-1, :-1], allowed, degenerate >= DEGENERATE_RUN)
        if col < 0:
            return "optimal"
        row = _choose_leaving(T, col, basis)
        if row < 0:
            return "unbounded"
        step = T[row, -1]
        _pivot(T, row, col)
        basis[row] = col
        degenerate = degenerate + 1 if step <= EPS else 0
    return "limit"


def _standard_form(lp: CompiledLP, lb, ub):
    """Map to max c'x' s.t. rows, x' >= 0. Returns the pieces and a back-map."""
    A, b = lp.A, lp.b.copy()
    cols, costs, back = [], [], []     # back: (var, scale, which column)
    const = 0.0
    extra_rows, extra_rhs = [], []
    for j in range(A.shape[1]):
        lo, hi = lb[j], ub[j]
        if hi - lo <= 1e-12:
            b -= A[:, j] * lo
            const += lp.c[j] * lo
            back.append(("fixed", lo))
        elif math.isfinite(lo):
            b -= A[:, j] * lo
            const += lp.c[j] * lo
            k = len(cols)
            cols.append(A[:, j])
            costs.append(lp.c[j])
            back.append(("shift", lo, k))
            if math.isfinite(hi):
                extra_rows.append((k, 1.0))
                extra_rhs.append(hi - lo)
        elif math.isfinite(hi):
            b -= A[:, j] * hi
            const += lp.c[j] * hi
            k = len(cols)
            cols.append(-A[:, j])
            costs.append(-lp.c[j])
            back.append(("flip", hi, k))
        else:
            k = len(cols)
            cols.append(A[:, j])
            cols.append(-A[:, j])
            costs.extend([lp.c[j], -lp.c[j]])
            back.append(("free", k))
    nstruct = len(cols)
    rows = np.column_stack(cols) if cols else np.zeros((A.shape[0], 0))
    senses = list(lp.senses)
    if extra_rows:
        ub_rows = np.zeros((len(extra_rows), nstruct))
        for r, (k, v) in enumerate(extra_rows):
            ub_rows[r, k] = v
        rows = np.vstack([rows, ub_rows])
        b = np.concatenate([b, extra_rhs])
        senses += ["<="] * len(extra_rows)
    return rows, senses, b, np.array(costs), const, back


def _recover(back, xs):
    x = np.empty(len(back))
    for j, item in enumerate(back):
        kind = item[0]
        if kind == "fixed":
            x[j] = item[1]
        elif kind == "shift":
            x[j] = item[1] + xs[item[2]]
        elif kind == "flip":
            x[j] = item[1] - xs[item[2]]
        else:
            x[j] = xs[item[1]] - xs[item[1] + 1]
    return x


def solve_dense(lp: CompiledLP, lb=None, ub=None, max_iter=None):
    """Solve the relaxation with the given bounds.

    Returns (status, x, objective) with the objective in maximisation form.
    """
    lb = lp.lb if lb is None else lb
    ub = lp.ub if ub is None else ub
    if np.any(lb > ub + 1e-12):
        return "infeasible", None, None
    A, senses, b, cost, const, back = _standard_form(lp, lb, ub)
    m, ns = A.shape
    if m == 0:
        if np.any(cost > EPS):
            return "unbounded", None, None
        return "optimal", _recover(back, np.zeros(ns)), const

    A = A.copy()
    senses = list(senses)
    neg = b < 0
    A[neg] *= -1
    b = np.where(neg, -b, b)
    for i in np.flatnonzero(neg):
        senses[i] = {"<=": ">=", ">=": "<=", "==": "=="}[senses[i]]

    n_slack = sum(s != "==" for s in senses)
    n_art = sum(s != "<=" for s in senses)
    ncol = ns + n_slack + n_art
    T = np.zeros((m + 1, ncol + 1))
    T[:m, :ns] = A
    T[:m, -1] = b
    basis = [0] * m
    art_cols = []
    s_col, a_col = ns, ns + n_slack
    for i, s in enumerate(senses):
        if s == "<=":
            T[i, s_col] = 1.0
            basis[i] = s_col
            s_col += 1
        elif s == ">=":
            T[i, s_col] = -1.0
            s_col += 1
            T[i, a_col] = 1.0
            basis[i] = a_col
            art_cols.append(a_col)
            a_col += 1
        else:
            T[i, a_col] = 1.0
            basis[i] = a_col
            art_cols.append(a_col)
            a_col += 1

    max_iter = max_iter or 50 * (m + ncol) + 1000
    allowed = np.ones(ncol, dtype=bool)
    is_art = np.zeros(ncol, dtype=bool)
    is_art[art_cols] = True

    if art_cols:
        T[-1, :] = 0.0
        T[-1, art_cols] = 1.0
        for i in range(m):
            if is_art[basis[i]]:
                T[-1] -= T[i]
        status = _run(T, basis, allowed, max_iter)
        if status == "limit":
            return "limit_reached", None, None
        if -T[-1, -1] > FEAS_TOL * max(1.0, np.abs(b).max()):
            return "infeasible", None, None
        # drive zero-level artificials out of the basis
        keep_rows = []
        for i in range(m):
            if is_art[basis[i]]:
                cand = np.flatnonzero((np.abs(T[i, :ncol]) > 1e-9) & ~is_art)
                if cand.size:
                    _pivot(T, i, int(cand[0]))
                    basis[i] = int(cand[0])
                    keep_rows.append(i)
            else:
                keep_rows.append(i)
        if len(keep_rows) < m:
            T = np.vstack([T[keep_rows], T[-1:]])
            basis = [basis[i] for i in keep_rows]
            m = len(keep_rows)
        allowed = ~is_art

    T[-1, :] = 0.0
    T[-1, :ns] = -cost
    for i in range(m):
        coef = T[-1, basis[i]]
        if coef != 0.0:
            T[-1] -= coef * T[i]
    status = _run(T, basis, allowed, max_iter)
    if status == "limit":
        return "limit_reached", None, None
    if status == "unbounded":
        return "unbounded", None, None
    xs = np.zeros(ncol)
    for i, col in enumerate(basis):
        xs[col] = T[i, -1]
    x = _recover(back, xs[:ns])
    return "optimal", x, float(T[-1, -1] + const)


def solve_lp(model: LinearModel) -> SolveResult:
    """Optimal basic solution of the continuous relaxation of ``model``."""
    lp = CompiledLP(model)
    status, x, obj = solve_dense(lp)
    if status != "optimal":
        msg = "iteration limit hit in simplex" if status == "limit_reached" else ""
        return SolveResult(status, message=msg)
    obj = lp.sign * obj
    values = dict(zip(lp.names, x.tolist()))
    return SolveResult("optimal", obj, values, bound=obj, gap=0.0)
