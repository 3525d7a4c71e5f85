"""Best-first branch-and-bound over the dense simplex."""
from __future__ import annotations

import heapq
import math

import numpy as np

from .model import LinearModel, SolveResult
from .simplex import CompiledLP, solve_dense

INT_TOL = 1e-6
ABS_TOL = 1e-9


def relative_gap(incumbent: float, bound: float) -> float:
    """Gap between a maximisation incumbent and its upper bound."""
    diff = max(0.0, bound - incumbent)
    if diff <= ABS_TOL:
        return 0.0
    return diff / max(abs(incumbent), 1e-10)


def _most_fractional(x, integer):
    frac = np.abs(x - np.round(x))
    frac[~integer] = 0.0
    j = int(np.argmax(frac))        # argmax returns the lowest index on ties
    return j if frac[j] > INT_TOL else -1


START_TOL = 1e-7


def solve_milp(model: LinearModel, rel_gap: float = 0.0, node_limit: int = 10**6,
               start: dict | None = None) -> SolveResult:
    """Maximise (or minimise) ``model`` honouring integrality flags.

    Nodes are expanded in order of their relaxation bound, except that before
    the first incumbent the search dives depth-first. It stops once the best
    open bound is within ``rel_gap`` of the incumbent.

    ``start`` is an optional feasible assignment used as the first incumbent;
    it is checked and ignored if it violates the model.
    """
    if rel_gap < 0:
        raise ValueError("rel_gap must be nonnegative")
    lp = CompiledLP(model)
    integer = lp.integer
    lb0 = lp.lb.copy()
    ub0 = lp.ub.copy()
    lb0[integer] = np.ceil(lb0[integer] - INT_TOL)
    ub0[integer] = np.floor(ub0[integer] + INT_TOL)

    best_x, best_obj = None, -math.inf
    if start is not None and set(start) >= set(lp.names) and model.violation(start) <= START_TOL:
        best_x = np.array([float(start[nm]) for nm in lp.names])
        best_x[integer] = np.round(best_x[integer])
        best_obj = lp.sign * model.evaluate(start)
    heap = []
    counter = 0
    nodes = 0
    numeric_trouble = False
    closed_bound = -math.inf        # best bound among nodes dropped by the gap rule

    def relax(lb, ub):
        nonlocal nodes, numeric_trouble
        status, x, obj = solve_dense(lp, lb, ub)
        nodes += 1
        if status == "limit_reached":
            numeric_trouble = True
        if status != "optimal":
            return status, None
        return status, (-obj, lb, ub, x)

    def push(node):
        nonlocal counter
        heapq.heappush(heap, (node[0], counter, *node[1:]))
        counter += 1

    status, root = relax(lb0, ub0)
    if status == "unbounded":
        return SolveResult("unbounded", nodes=nodes, message="relaxation is unbounded")
    if root is not None:
        push(root)

    def gap_closed(bound):
        return best_x is not None and (
            bound <= best_obj + ABS_TOL or relative_gap(best_obj, bound) <= rel_gap)

    hit_limit = False
    while heap:
        neg, _, lb, ub, x = heap[0]
        bound = -neg
        if gap_closed(bound):
            closed_bound = max(closed_bound, bound)
            break
        if nodes >= node_limit:
            hit_limit = True
            break
        heapq.heappop(heap)
        # until an incumbent exists, plunge depth-first through the better child;
        # a plunge is at most two relaxations per integer and may overrun node_limit
        while True:
            j = _most_fractional(x, integer)
            if j < 0:
                if bound > best_obj:
                    best_obj = bound
                    best_x = x.copy()
                    best_x[integer] = np.round(best_x[integer])
                break
            down_ub = ub.copy()
            down_ub[j] = math.floor(x[j])
            up_lb = lb.copy()
            up_lb[j] = math.ceil(x[j])
            kids = []
            for klb, kub in ((lb, down_ub), (up_lb, ub)):
                st, node = relax(klb, kub)
                if st == "unbounded":
                    return SolveResult("unbounded", nodes=nodes, message="relaxation is unbounded")
                if node is not None:
                    kids.append(node)
            if not kids:
                break
            kids.sort(key=lambda k: k[0])
            if best_x is not None:
                for k in kids:
                    push(k)
                break
            for k in kids[1:]:
                push(k)
            neg, lb, ub, x = kids[0]
            bound = -neg

    open_bound = -heap[0][0] if heap else -math.inf
    if best_x is None:
        if hit_limit:
            return SolveResult("limit_reached", bound=lp.sign * open_bound, nodes=nodes,
                               message="node limit reached without an incumbent")
        msg = "simplex iteration limit hit at some node" if numeric_trouble else ""
        return SolveResult("limit_reached" if numeric_trouble else "infeasible",
                           nodes=nodes, message=msg)

    bound = max(best_obj, open_bound, closed_bound)
    gap = relative_gap(best_obj, bound)
    if hit_limit:
        status = "limit_reached"
    elif gap == 0.0:
        status = "optimal"
    else:
        status = "gap_reached"
    values = dict(zip(lp.names, best_x.tolist()))
    msg = "simplex iteration limit hit at some node" if numeric_trouble else ""
    return SolveResult(status, lp.sign * best_obj, values, lp.sign * bound, gap, nodes, msg)
