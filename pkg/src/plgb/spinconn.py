"""Spin connections on a Poisson principal bundle and their order-lambda data.

``omega`` and ``alpha`` map each fibre basis name ``e_i`` to the 1-form
component ``omega^i`` (``alpha^i``).  The fields ``e~_i`` are the action fields
of the bundle.
"""

from __future__ import annotations

import copy
from collections.abc import Mapping
from typing import Any

from .bundle import is_horizontal
from .calculus import OneForm, interior
from .spec import GeometrySpec
from .symkernel import Expr, RingError

ALPHA_PARAMETERS = ("s_p", "s_m")


class SpinError(RingError):
    """Raised when spin connection data is missing or inconsistent."""


def _require(B: GeometrySpec) -> None:
    if B.spin is None:
        raise SpinError("spec has no spin_connection block")
    if B.action is None or B.fibre is None:
        raise SpinError("spin connection checks need fibre and action blocks")


def validate_spin_connection(B: GeometrySpec) -> list[tuple[str, str, object]]:
    """(kind, label, defect) records for verticality and equivariance of omega and alpha."""
    _require(B)
    L, A = B.fibre.L, B.action
    omega, alpha = B.spin.omega, B.spin.alpha
    out: list[tuple[str, str, object]] = []
    for xi in L.basis:
        F = A.fields[xi]
        for k, ek in enumerate(L.basis):
            target = 1 if ek == xi else 0
            out.append(("verticality", f"i_{xi}(omega^{ek})", interior(F, omega[ek]) - target))
    for name, form in (("omega", omega), ("alpha", alpha)):
        for x, xi in enumerate(L.basis):
            for k, ek in enumerate(L.basis):
                d = A.on_form(xi, form[ek])
                for i, ei in enumerate(L.basis):
                    if L.c[x, i, k]:
                        d = d + form[ei] * L.c[x, i, k]
                out.append(("equivariance", f"{xi} on {name}^{ek}", d))
    for ek in L.basis:
        witness = {xi: interior(A.fields[xi], alpha[ek]) for xi in L.basis}
        for xi, val in witness.items():
            out.append(("horizontality", f"i_{xi}(alpha^{ek})", val))
    return out


def nabla_P(B: GeometrySpec, p: Expr) -> OneForm:
    """dp - omega^i e~_i(p); must be horizontal."""
    _require(B)
    out = B.frame.differential(p)
    for ei in B.fibre.L.basis:
        out = out - B.spin.omega[ei] * B.action.fields[ei](p)
    ok, witness = is_horizontal(B, out)
    if not ok:
        raise SpinError(f"nabla_P({p}) is not horizontal: ver = {witness}; omega is not a spin connection")
    return out


def gamma(B: GeometrySpec, p: Expr) -> OneForm:
    """Xi*-term on omega minus connection along d e~_i(p) on omega^i minus e~_i(p) alpha^i."""
    _require(B)
    if B.fibre.xi is None:
        raise SpinError("gamma needs the fibre xi_star")
    L, A, C, frame = B.fibre.L, B.action, B.connection, B.frame
    out = frame.zero()
    for k, ek in enumerate(L.basis):
        for coef, i, j in B.fibre.xi.star_terms(k):
            val = A.fields[L.basis[i]](A.fields[L.basis[j]](p))
            if val:
                out = out + B.spin.omega[ek] * (val * coef)
        ep = A.fields[ek](p)
        if ep:
            out = out - C.apply(frame.differential(ep), B.spin.omega[ek])
            out = out - B.spin.alpha[ek] * ep
    ok, witness = is_horizontal(B, out)
    if not ok:
        raise SpinError(f"gamma({p}) is not horizontal: ver = {witness}; transversality fails")
    return out


def varsigma(B: GeometrySpec, tau: OneForm) -> OneForm:
    """-sum_i connection along (e_i acting on tau) applied to omega^i, for horizontal tau."""
    _require(B)
    ok, witness = is_horizontal(B, tau)
    if not ok:
        raise SpinError(f"varsigma needs a horizontal form, ver = {witness}")
    out = B.frame.zero()
    for ei in B.fibre.L.basis:
        out = out - B.connection.apply(B.action.on_form(ei, tau), B.spin.omega[ei])
    return out


def is_basic_function(B: GeometrySpec, a: Expr) -> bool:
    return all(f(a).is_zero() for f in B.action.fields.values())


def leibniz_gap_check(B: GeometrySpec, a: Expr, p: Expr) -> OneForm:
    """Gamma(ap) - a Gamma(p) - nabla_da nabla_P p + nabla_dp da + nabla_P {a,p}."""
    _require(B)
    if not is_basic_function(B, a):
        raise SpinError(f"{a} is not a base function")
    frame, C = B.frame, B.connection
    da = frame.differential(a)
    out = gamma(B, a * p) - gamma(B, p) * a
    out = out - C.apply(da, nabla_P(B, p)) + C.apply(frame.differential(p), da)
    return out + nabla_P(B, B.poisson.bracket(a, p))


def varsigma_cross_check(B: GeometrySpec, a: Expr, p: Expr) -> OneForm:
    """varsigma(p da) - (Gamma(ap) - a Gamma(p)) for base a."""
    if not is_basic_function(B, a):
        raise SpinError(f"{a} is not a base function")
    return varsigma(B, B.frame.differential(a) * p) - (gamma(B, a * p) - gamma(B, p) * a)


def homogeneous_parts(B: GeometrySpec, p: Expr, xi: str | None = None) -> dict[Any, Expr]:
    """Split p into eigencomponents of the field of xi (the sole fibre element by default)."""
    _require(B)
    basis = B.fibre.L.basis
    if xi is None:
        if len(basis) != 1:
            raise SpinError("homogeneous degree needs a one-dimensional fibre or an explicit element")
        xi = basis[0]
    F = B.action.fields[xi]
    ring = p.ring
    parts: dict[Any, Expr] = {}
    for mono, coeff in p.terms.items():
        m = ring.monomial(mono)
        image = F(m)
        if image.is_zero():
            deg = 0
        else:
            ratio = image.terms.get(mono)
            if ratio is None or image != m * ratio:
                raise SpinError(f"monomial {m} is not an eigenvector of the field of {xi}")
            deg = ratio
        parts[deg] = parts.get(deg, ring.zero()) + m * coeff
    return {k: v for k, v in parts.items() if v}


def symbolic_alpha(raw: Mapping[str, Any], components: Mapping[str, Mapping[str, str]] | None = None) -> dict:
    """Extend a spec document with constant parameters s_p, s_m and alpha = s_p b^2 e+ + s_m a^2 e-.

    The weights b^2 and a^2 cancel the fibre weight of e+ and e-, so alpha is
    horizontal and invariant; the parameters have zero differential, zero
    brackets and are killed by every field.
    """
    doc = copy.deepcopy(dict(raw))
    ring = doc["ring"]
    for s in ALPHA_PARAMETERS:
        if s in ring["generators"]:
            raise SpinError(f"generator name {s!r} already used")
    ring["generators"] = list(ring["generators"]) + list(ALPHA_PARAMETERS)
    for s in ALPHA_PARAMETERS:
        doc["frame"]["differential"][s] = {}
    spin = doc.setdefault("spin_connection", {"omega": {}})
    basis = doc["fibre"]["basis"]
    if components is None:
        if len(basis) != 1:
            raise SpinError("the default symbolic alpha is for a one-dimensional fibre")
        components = {basis[0]: {"ep": "s_p*b^2", "em": "s_m*a^2"}}
    spin["alpha"] = {k: dict(v) for k, v in components.items()}
    return doc
