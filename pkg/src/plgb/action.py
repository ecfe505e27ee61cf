"""Infinitesimal Lie algebra actions and the covariance defects built on them.

Both chiralities share the same shape of identity once ``xi.`` is read as the
action on functions and forms (``xi|>`` with left-invariant style fields, or
``<|xi`` with right-invariant ones), so one set of formulas serves both; the
chirality is carried for reporting and for choosing the delta-term fields.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

from .calculus import Frame, OneForm, VectorField, interior, lie_derivative
from .liebialg import LieBialgebra
from .poisson import ContravariantConnection, PoissonStructure, schouten
from .symkernel import Expr, RingError

CHIRALITIES = ("left", "right")
DELTA_FIELD_CHOICES = ("action", "left_invariant")


class ActionError(RingError):
    """Raised for malformed action data."""


@dataclass
class ActionSpec:
    chirality: str
    L: LieBialgebra
    frame: Frame
    fields: dict[str, VectorField]
    form_action: dict[str, dict[str, OneForm]] | None = None
    delta_fields: str = "action"
    left_invariant_fields: dict[str, VectorField] = field(default_factory=dict)

    def __post_init__(self):
        if self.chirality not in CHIRALITIES:
            raise ActionError(f"chirality must be one of {CHIRALITIES}, got {self.chirality!r}")
        if self.delta_fields not in DELTA_FIELD_CHOICES:
            raise ActionError(f"delta_fields must be one of {DELTA_FIELD_CHOICES}")
        missing = [b for b in self.L.basis if b not in self.fields]
        if missing:
            raise ActionError(f"action fields missing for basis elements {missing}")
        if self.delta_fields == "left_invariant":
            missing = [b for b in self.L.basis if b not in self.left_invariant_fields]
            if missing:
                raise ActionError(f"left-invariant fields missing for {missing}")
        if self.form_action is not None:
            for b, table in self.form_action.items():
                if b not in self.fields:
                    raise ActionError(f"form_action names unknown basis element {b!r}")
                missing = [e for e in self.frame.names if e not in table]
                if missing:
                    raise ActionError(f"form_action for {b!r} misses frame elements {missing}")

    # ------------------------------------------------------------------
    def on_function(self, xi: str, p: Expr) -> Expr:
        return self.fields[xi](p)

    def on_form(self, xi: str, eta: OneForm) -> OneForm:
        table = self.form_action.get(xi) if self.form_action else None
        return lie_derivative(self.fields[xi], eta, self.frame, table)

    def delta_field(self, name: str) -> VectorField:
        if self.delta_fields == "left_invariant":
            return self.left_invariant_fields[name]
        return self.fields[name]

    def delta_terms(self, xi: str) -> list[tuple[object, str, str]]:
        L = self.L
        return [(coef, L.basis[v], L.basis[w]) for coef, v, w in L.cobracket_terms(L.index(xi))]

    def check(self) -> list[str]:
        """Fields are well defined and the frame table agrees with the Cartan formula when possible."""
        problems = []
        for b, f in self.fields.items():
            problems += [f"field {b}: {p}" for p in f.check()]
        if self.form_action is not None and (self.frame.d2 is not None or self.frame.in_differentials is None):
            for b, table in self.form_action.items():
                for e in self.frame.names:
                    cartan = lie_derivative(self.fields[b], self.frame.element(e), self.frame)
                    if cartan != table[e]:
                        problems.append(f"form_action {b} on {e} is {table[e]}, Cartan formula gives {cartan}")
        problems += self.check_representation()
        return problems

    def check_representation(self) -> list[str]:
        """[F_x, F_y] must equal F_[x,y] on generators, up to the sign fixed by chirality."""
        problems = []
        L = self.L
        ring = self.frame.ring
        # a left action represents the bracket, a right action the opposite bracket
        sign = 1 if self.chirality == "left" else -1
        for i, x in enumerate(L.basis):
            for j, y in enumerate(L.basis):
                if j <= i:
                    continue
                for g in ring.visible:
                    gen = ring.gen(g)
                    comm = self.fields[x](self.fields[y](gen)) - self.fields[y](self.fields[x](gen))
                    target = ring.zero()
                    for k, z in enumerate(L.basis):
                        if L.c[i, j, k]:
                            target = target + self.fields[z](gen) * (L.c[i, j, k] * sign)
                    if comm != target:
                        problems.append(f"fields of {x},{y} do not represent the bracket on {g}")
        return problems


def plg_action_defect(A: ActionSpec, P: PoissonStructure, xi: str, p: Expr, q: Expr, L: LieBialgebra | None = None) -> Expr:
    act = A.on_function
    out = act(xi, P.bracket(p, q)) - P.bracket(act(xi, p), q) - P.bracket(p, act(xi, q))
    for coef, v, w in A.delta_terms(xi):
        out = out - act(v, p) * act(w, q) * coef
    return out


def conn_covariance_defect(
    A: ActionSpec,
    P: PoissonStructure,
    C: ContravariantConnection,
    xi: str,
    eta: OneForm,
    tau: OneForm,
    L: LieBialgebra | None = None,
    frame: Frame | None = None,
) -> OneForm:
    out = A.on_form(xi, C.apply(eta, tau)) - C.apply(A.on_form(xi, eta), tau) - C.apply(eta, A.on_form(xi, tau))
    for coef, v, w in A.delta_terms(xi):
        weight = interior(A.delta_field(v), eta)
        if weight:
            out = out - A.on_form(w, tau) * (weight * coef)
    return out


def cor44_check(
    A: ActionSpec,
    P: PoissonStructure,
    C: ContravariantConnection,
    xi: str,
    tau: OneForm,
    eta: OneForm,
    L: LieBialgebra | None = None,
    frame: Frame | None = None,
) -> OneForm:
    """Covariance of the Schouten bracket.

    The half Leibnizator of the Lie derivative along the bivector v^w is
    i_v(tau) L_w(eta) + i_w(eta) L_v(tau); its i_{v^w} d-terms cancel.
    """
    frame = frame or A.frame
    if frame.d2 is None and frame.in_differentials is not None:
        raise ActionError("cor44 needs the structure equations (d2 block)")
    act = A.on_form
    out = act(xi, schouten(P, tau, eta, frame)) - schouten(P, act(xi, tau), eta, frame) - schouten(P, tau, act(xi, eta), frame)
    for coef, v, w in A.delta_terms(xi):
        fv, fw = A.delta_field(v), A.delta_field(w)
        out = out - (act(w, eta) * interior(fv, tau) + act(v, tau) * interior(fw, eta)) * coef
    return out


def form_action_from_blocks(frame: Frame, block: Mapping[str, Mapping[str, Mapping[str, str]]]) -> dict[str, dict[str, OneForm]]:
    return {b: {e: frame.form(v) for e, v in table.items()} for b, table in block.items()}
