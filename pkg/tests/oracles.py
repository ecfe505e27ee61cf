"""Independent oracles built on sympy, sharing no code with the kernel."""

from __future__ import annotations

import json
from functools import lru_cache

import sympy as sp

from plgb.spec import resolve_path

A, B, C, D = sp.symbols("a b c d")
SU2_VARS = (A, B, C, D)
SU2_IDEAL = [A * D - B * C - 1]


def to_sympy(e) -> sp.Expr:
    names = {g: sp.Symbol(g) for g in e.ring.generators}
    return sp.sympify(str(e).replace("^", "**"), locals=names)


def su2_reduce(expr: sp.Expr) -> sp.Expr:
    """Normal form modulo ad - bc - 1 in lex order a > b > c > d (leading term ad)."""
    expr = sp.expand(expr)
    if expr == 0:
        return sp.Integer(0)
    _, rem = sp.reduced(expr, SU2_IDEAL, *SU2_VARS, order="lex")
    return sp.expand(rem)


@lru_cache(maxsize=None)
def su2_bivector() -> dict[tuple[int, int], sp.Expr]:
    raw = json.loads(resolve_path("su2_hopf").read_text())["poisson"]
    out = {}
    for key, val in raw.items():
        g, h = (SU2_VARS[["a", "b", "c", "d"].index(s.strip())] for s in key.split(","))
        i, j = SU2_VARS.index(g), SU2_VARS.index(h)
        v = sp.sympify(val.replace("^", "**"), locals={"a": A, "b": B, "c": C, "d": D})
        out[(i, j)] = v
        out[(j, i)] = -v
    return out


def su2_bracket(f: sp.Expr, g: sp.Expr) -> sp.Expr:
    """sum pi^{ij} d_i f d_j g, reduced."""
    pi = su2_bivector()
    total = 0
    for (i, j), v in pi.items():
        total += v * sp.diff(f, SU2_VARS[i]) * sp.diff(g, SU2_VARS[j])
    return su2_reduce(total)
