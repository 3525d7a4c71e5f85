"""Writer and reader for the CPLEX-style LP text format.

Every variable gets a line in the Bounds section, in declaration order, so
parsing the text back recovers the same variable order.
"""
from __future__ import annotations

import math
import re

from .model import LinearModel

_TOKEN = re.compile(
    r"\s*(<=|>=|=<|=>|=|<|>|\+|-|:|"
    r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?|"
    r"[A-Za-z_!\"#$%&()/,;?@`'{}|~][\w!\"#$%&()/,.;?@`'{}|~\[\]]*)")
_SECTIONS = {
    "maximize": "max", "maximise": "max", "maximum": "max", "max": "max",
    "minimize": "min", "minimise": "min", "minimum": "min", "min": "min",
    "subject to": "st", "such that": "st", "st": "st", "s.t.": "st",
    "bounds": "bounds", "bound": "bounds",
    "generals": "gen", "general": "gen", "gen": "gen",
    "binaries": "bin", "binary": "bin", "bin": "bin",
    "end": "end",
}


def _num(v: float) -> str:
    if v == math.inf:
        return "inf"
    if v == -math.inf:
        return "-inf"
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def _expr(coeffs: dict, order: dict) -> str:
    parts = []
    for name in sorted(coeffs, key=order.__getitem__):
        c = coeffs[name]
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        term = name if mag == 1 else f"{_num(mag)} {name}"
        if not parts:
            parts.append(f"-{term}" if sign == "-" else term)
        else:
            parts.append(f"{sign} {term}")
    return " ".join(parts)


def export_lp_format(model: LinearModel) -> str:
    """Deterministic LP text for ``model``."""
    order = {v.name: k for k, v in enumerate(model.variables)}
    out = [f"\\ {model.name}", "Maximize" if model.sense == "max" else "Minimize"]
    out.append(f" obj: {_expr(model.objective, order) or '0'}")
    out.append("Subject To")
    rel = {"<=": "<=", ">=": ">=", "==": "="}
    first = model.variables[0].name if model.variables else None
    for con in model.constraints:
        lhs = _expr(con.coeffs, order)
        if not lhs:
            if first is None:
                continue
            lhs = f"0 {first}"
        out.append(f" {con.name}: {lhs} {rel[con.sense]} {_num(con.rhs)}")
    out.append("Bounds")
    for v in model.variables:
        if v.lb == -math.inf and v.ub == math.inf:
            out.append(f" {v.name} free")
        elif v.lb == v.ub:
            out.append(f" {v.name} = {_num(v.lb)}")
        elif v.ub == math.inf:
            out.append(f" {v.name} >= {_num(v.lb)}")
        else:
            out.append(f" {_num(v.lb)} <= {v.name} <= {_num(v.ub)}")
    gens = [v.name for v in model.variables if v.integer and not v.binary]
    bins = [v.name for v in model.variables if v.binary]
    if gens:
        out.append("Generals")
        out.extend(f" {n}" for n in gens)
    if bins:
        out.append("Binaries")
        out.extend(f" {n}" for n in bins)
    out.append("End")
    return "\n".join(out) + "\n"


def _tokens(text: str) -> list[str]:
    toks, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot tokenise LP text near {text[pos:pos + 20]!r}")
        toks.append(m.group(1))
        pos = m.end()
    return toks


def _is_number(tok: str) -> bool:
    return tok[0].isdigit() or tok[0] == "." or tok.lower() in ("inf", "infinity")


def _value(tok: str) -> float:
    return math.inf if tok.lower() in ("inf", "infinity") else float(tok)


def _parse_rows(toks: list[str], with_rhs: bool):
    """Split a token stream into (label, coeffs, sense, rhs) records."""
    rows, k = [], 0
    while k < len(toks):
        label = None
        if k + 1 < len(toks) and toks[k + 1] == ":":
            label = toks[k]
            k += 2
        coeffs: dict = {}
        sign, coef = 1.0, None
        while k < len(toks) and toks[k] not in ("<=", ">=", "=<", "=>", "=", "<", ">"):
            t = toks[k]
            if with_rhs is False and k + 1 < len(toks) and toks[k + 1] == ":":
                break
            if t == "+":
                sign = sign
            elif t == "-":
                sign = -sign
            elif _is_number(t):
                coef = _value(t) if coef is None else coef * _value(t)
            else:
                coeffs[t] = coeffs.get(t, 0.0) + sign * (1.0 if coef is None else coef)
                sign, coef = 1.0, None
            k += 1
        if not with_rhs:
            rows.append((label, coeffs, None, None))
            continue
        if k >= len(toks):
            raise ValueError("constraint without relation")
        op = {"=<": "<=", "<": "<=", "=>": ">=", ">": ">=", "=": "=="}.get(toks[k], toks[k])
        k += 1
        rsign = 1.0
        while toks[k] in ("+", "-"):
            rsign = -rsign if toks[k] == "-" else rsign
            k += 1
        rows.append((label, coeffs, op, rsign * _value(toks[k])))
        k += 1
    return rows


def _parse_bound(line: str):
    toks = _tokens(line)
    vals, k = [], 0
    # fold unary signs into numbers
    while k < len(toks):
        t = toks[k]
        if t in ("+", "-") and k + 1 < len(toks) and _is_number(toks[k + 1]):
            v = _value(toks[k + 1])
            vals.append(-v if t == "-" else v)
            k += 2
        elif _is_number(t):
            vals.append(_value(t))
            k += 1
        else:
            vals.append(t)
            k += 1
    names = [t for t in vals if isinstance(t, str) and t not in ("<=", ">=", "=<", "=>", "=", "<", ">")]
    if len(vals) == 2 and str(vals[1]).lower() == "free":
        return vals[0], -math.inf, math.inf
    name = names[0]
    lo, hi = None, None
    if len(vals) == 5:
        return name, vals[0], vals[4]
    a, op, b = vals
    op = {"=<": "<=", "<": "<=", "=>": ">=", ">": ">="}.get(op, op)
    if a == name:
        if op == "<=":
            hi = b
        elif op == ">=":
            lo = b
        else:
            lo = hi = b
    else:
        if op == "<=":
            lo = a
        elif op == ">=":
            hi = a
        else:
            lo = hi = a
    return name, lo, hi


def parse_lp_format(text: str) -> LinearModel:
    """Inverse of :func:`export_lp_format` (also accepts common LP-format variants)."""
    name = "model"
    sections: dict[str, list[str]] = {"obj": [], "st": [], "bounds": [], "gen": [], "bin": []}
    sense, current = "max", None
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("\\"):
            if current is None and line[1:].strip():
                name = line[1:].strip()
            continue
        line = line.split("\\")[0].strip()
        if not line:
            continue
        key = _SECTIONS.get(line.lower())
        if key in ("max", "min"):
            sense, current = key, "obj"
            continue
        if key == "end":
            break
        if key is not None:
            current = key
            continue
        if current is None:
            raise ValueError(f"text before the objective section: {line!r}")
        sections[current].append(line)

    model = LinearModel(name)
    declared: dict[str, list] = {}

    def touch(v):
        if v not in declared:
            declared[v] = [0.0, math.inf, False]

    obj_rows = _parse_rows(_tokens(" ".join(sections["obj"])), with_rhs=False)
    objective = obj_rows[0][1] if obj_rows else {}
    cons = _parse_rows(_tokens(" ".join(sections["st"])), with_rhs=True)
    for line in sections["bounds"]:
        v, lo, hi = _parse_bound(line)
        touch(v)
        if lo is not None:
            declared[v][0] = lo
        if hi is not None:
            declared[v][1] = hi
    for v in objective:
        touch(v)
    for _, coeffs, _, _ in cons:
        for v in coeffs:
            touch(v)
    for v in " ".join(sections["gen"]).split():
        touch(v)
        declared[v][2] = True
    for v in " ".join(sections["bin"]).split():
        touch(v)
        declared[v] = [max(declared[v][0], 0.0), min(declared[v][1], 1.0), True]
    for v, (lo, hi, integ) in declared.items():
        model.add_var(v, lo, hi, integ)
    for k, (label, coeffs, op, rhs) in enumerate(cons):
        model.add_constr(coeffs, op, rhs, label or f"r{k}")
    model.set_objective(objective, sense)
    return model
