"""Principal bundle checks and induction of the base Poisson structure.

The base is described by invariant polynomials upstairs.  Brackets and
connection values of base generators are computed on the total space and then
re-expressed over the base by an exact linear solve: unknown coefficients on
base monomials (up to a degree bound) are matched against the upstairs
expression monomial by monomial.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement

from .calculus import OneForm, interior, wedge, interior2
from .poisson import pi, schouten
from .spec import GeometrySpec, SpecError, build_spec, substitute
from .symkernel import Expr, Monomial, Ring, RingError


class BundleError(RingError):
    """Raised when base induction cannot proceed."""


def _require_bundle(B: GeometrySpec) -> None:
    if B.action is None or B.fibre is None:
        raise BundleError("bundle checks need fibre and action blocks")


def ver(B: GeometrySpec, eta: OneForm) -> dict[str, Expr]:
    _require_bundle(B)
    return {xi: interior(f, eta) for xi, f in B.action.fields.items()}


def is_horizontal(B: GeometrySpec, eta: OneForm) -> tuple[bool, dict[str, Expr] | None]:
    for xi, val in ver(B, eta).items():
        if not val.is_zero():
            return False, {xi: val}
    return True, None


def is_invariant(B: GeometrySpec, eta: OneForm) -> tuple[bool, dict[str, OneForm] | None]:
    for xi in B.action.fields:
        val = B.action.on_form(xi, eta)
        if not val.is_zero():
            return False, {xi: val}
    return True, None


def _xi_star_pairing(B: GeometrySpec, xi: str, eta: OneForm, tau: OneForm) -> Expr:
    """sum over Xi*(xi) = sum X e_i (x) e_j of X i_{F_i}(eta) i_{F_j}(tau)."""
    if B.fibre.xi is None:
        raise BundleError("fibre block has no xi_star")
    L = B.fibre.L
    fields = B.action.fields
    total = B.ring.zero()
    for coef, i, j in B.fibre.xi.star_terms(L.index(xi)):
        total = total + interior(fields[L.basis[i]], eta) * interior(fields[L.basis[j]], tau) * coef
    return total


def transversality_defect(B: GeometrySpec, xi: str, eta: OneForm, tau: OneForm) -> Expr:
    _require_bundle(B)
    F = B.action.fields[xi]
    lhs = interior(F, B.connection.apply(eta, tau))
    rhs = _xi_star_pairing(B, xi, eta, tau) + pi(B.poisson, B.frame, eta, B.frame.differential(interior(F, tau)))
    return lhs - rhs


def cor52_check(B: GeometrySpec, xi: str, eta: OneForm, tau: OneForm) -> Expr:
    """i_F[eta,tau] - pi(eta, d i_F tau) + pi(tau, d i_F eta) - 1/2 sum interior2(delta1, delta2, eta^tau).

    On exact forms this is the covariance identity for the bracket, which fixes
    the sign of the second pi term.
    """
    _require_bundle(B)
    A, frame, P = B.action, B.frame, B.poisson
    F = A.fields[xi]
    out = interior(F, schouten(P, eta, tau, frame))
    out = out - pi(P, frame, eta, frame.differential(interior(F, tau)))
    out = out + pi(P, frame, tau, frame.differential(interior(F, eta)))
    two = wedge(eta, tau)
    for coef, v, w in A.delta_terms(xi):
        out = out - interior2(A.fields[v], A.fields[w], two) * (Fraction(coef) / 2)
    return out


# ----------------------------------------------------------------------
# exact sparse solving


def solve_columns(
    columns: Sequence[Mapping[object, Fraction]],
    target: Mapping[object, Fraction],
) -> list[Fraction] | None:
    """Solve sum_j x_j columns[j] = target; pivots go to the earliest columns, free variables are 0."""
    rows: dict[object, dict[int, Fraction]] = {}
    for j, col in enumerate(columns):
        for key, val in col.items():
            if val:
                rows.setdefault(key, {})[j] = Fraction(val)
    rhs: dict[object, Fraction] = {k: Fraction(v) for k, v in target.items() if v}
    for key in rhs:
        rows.setdefault(key, {})
    by_col: dict[int, set] = {}
    for key, row in rows.items():
        for j in row:
            by_col.setdefault(j, set()).add(key)
    pivots: dict[int, object] = {}
    used: set = set()
    for j in range(len(columns)):
        candidates = [k for k in by_col.get(j, ()) if k not in used and rows[k].get(j)]
        if not candidates:
            continue
        pk = min(candidates, key=lambda k: (len(rows[k]), repr(k)))
        prow = rows[pk]
        inv = 1 / prow[j]
        for c in list(prow):
            prow[c] *= inv
        if pk in rhs:
            rhs[pk] *= inv
        used.add(pk)
        pivots[j] = pk
        for k in list(by_col.get(j, ())):
            if k == pk:
                continue
            row = rows[k]
            f = row.get(j)
            if not f:
                continue
            for c, v in prow.items():
                nv = row.get(c, 0) - f * v
                if nv:
                    if c not in row:
                        by_col.setdefault(c, set()).add(k)
                    row[c] = nv
                else:
                    row.pop(c, None)
                    by_col.get(c, set()).discard(k)
            r = rhs.get(pk, 0)
            if r:
                nr = rhs.get(k, 0) - f * r
                if nr:
                    rhs[k] = nr
                else:
                    rhs.pop(k, None)
    for k, v in rhs.items():
        if v and k not in used and not rows[k]:
            return None
    x = [Fraction(0)] * len(columns)
    for j, pk in pivots.items():
        x[j] = rhs.get(pk, Fraction(0))
    return x


def _vector(e: Expr, tag=None) -> dict[object, Fraction]:
    return {(tag, m) if tag is not None else m: c for m, c in e.terms.items()}


def _form_vector(eta: OneForm) -> dict[object, Fraction]:
    out = {}
    for i, c in enumerate(eta.coords):
        out.update(_vector(c, i))
    return out


def base_monomials(ring: Ring, degree: int) -> list[Monomial]:
    """Normal monomials in the visible generators, ordered by total degree."""
    n = len(ring.visible)
    pad = (0,) * (ring.nvars - n)
    out = []
    for deg in range(degree + 1):
        for combo in combinations_with_replacement(range(n), deg):
            mono = [0] * n
            for i in combo:
                mono[i] += 1
            m = tuple(mono) + pad
            if ring.is_normal(m):
                out.append(m)
    return out


@dataclass
class InducedBase:
    spec: GeometrySpec
    raw: dict
    brackets: dict[tuple[str, str], Expr]
    connection: dict[tuple[str, str], OneForm]
    symmetry_table: dict[tuple[str, str], Expr] = field(default_factory=dict)


class _BaseSolver:
    def __init__(self, B: GeometrySpec, base_ring: Ring, degree_bound: int):
        self.B = B
        self.base_ring = base_ring
        self.bound = degree_bound
        self.images = {g: B.bundle.base_generators[g] for g in base_ring.visible}
        full = dict(self.images)
        for k in range(len(base_ring.denominators)):
            full[f"inv_{k}"] = B.ring.zero()
        self._full = full
        self._mono_cache: dict[Monomial, Expr] = {}
        self.monos = base_monomials(base_ring, degree_bound)
        self.dgen = {g: B.frame.differential(e) for g, e in self.images.items()}

    def image(self, m: Monomial) -> Expr:
        if m not in self._mono_cache:
            self._mono_cache[m] = substitute(self.base_ring.monomial(m), self._full, self.B.ring)
        return self._mono_cache[m]

    def _monos_upto(self, d: int) -> list[Monomial]:
        return [m for m in self.monos if sum(m) <= d]

    def function(self, f: Expr, what: str) -> Expr:
        for d in range(self.bound + 1):
            monos = self._monos_upto(d)
            x = solve_columns([_vector(self.image(m)) for m in monos], _vector(f))
            if x is not None:
                out = self.base_ring.zero()
                for m, c in zip(monos, x):
                    if c:
                        out = out + self.base_ring.monomial(m, c)
                return out
        raise BundleError(f"{what}: {f} is not a base polynomial of degree <= {self.bound}")

    def form(self, eta: OneForm, what: str) -> dict[str, Expr]:
        gens = self.base_ring.visible
        for d in range(self.bound + 1):
            monos = self._monos_upto(d)
            cols, keys = [], []
            for m in monos:
                img = self.image(m)
                for g in gens:
                    cols.append(_form_vector(self.dgen[g] * img))
                    keys.append((g, m))
            x = solve_columns(cols, _form_vector(eta))
            if x is not None:
                out = {g: self.base_ring.zero() for g in gens}
                for (g, m), c in zip(keys, x):
                    if c:
                        out[g] = out[g] + self.base_ring.monomial(m, c)
                return out
        raise BundleError(f"{what}: {eta} is not in the span of base differentials with degree <= {self.bound}")


def induce_base(B: GeometrySpec, degree_bound: int | None = None) -> InducedBase:
    """Compute the base Poisson bracket, connection and descended symmetry."""
    _require_bundle(B)
    if B.bundle is None:
        raise BundleError("spec has no bundle block")
    bd = B.bundle
    bound = degree_bound if degree_bound is not None else bd.degree_bound
    names = list(bd.base_generators)
    base_ring = Ring(names, relations=bd.base_relations, denominators=bd.base_denominators)
    solver = _BaseSolver(B, base_ring, bound)
    up = bd.base_generators
    P, C, frame = B.poisson, B.connection, B.frame

    brackets: dict[tuple[str, str], Expr] = {}
    for i, u in enumerate(names):
        for v in names[i + 1 :]:
            val = P.bracket(up[u], up[v])
            brackets[(u, v)] = solver.function(val, f"bracket {{{u},{v}}}")

    connection: dict[tuple[str, str], dict[str, Expr]] = {}
    for u in names:
        for v in names:
            out = C.apply(solver.dgen[u], solver.dgen[v])
            ok, witness = is_horizontal(B, out)
            if not ok:
                raise BundleError(f"connection along d{u} on d{v} is not horizontal: ver = {witness}")
            ok, witness = is_invariant(B, out)
            if not ok:
                raise BundleError(f"connection along d{u} on d{v} is not invariant: {witness}")
            connection[(u, v)] = solver.form(out, f"connection along d{u} on d{v}")

    symmetry_table: dict[tuple[str, str], Expr] = {}
    if bd.symmetry_fields:
        for xi, fld in bd.symmetry_fields.items():
            for u in names:
                symmetry_table[(u, xi)] = solver.function(fld(up[u]), f"{u} under {xi}")

    raw = _base_document(B, base_ring, brackets, connection, symmetry_table)
    try:
        spec = build_spec(raw, name=f"base of {B.name}")
    except SpecError as exc:
        raise BundleError(f"induced base failed validation: {exc}") from None
    forms = {k: spec.frame.form({f"d{g}": str(c) for g, c in v.items()}) for k, v in connection.items()}
    table = {k: spec.ring.parse(str(v)) for k, v in symmetry_table.items()}
    return InducedBase(spec, raw, {k: spec.ring.parse(str(v)) for k, v in brackets.items()}, forms, table)


def _base_document(B, base_ring, brackets, connection, symmetry_table) -> dict:
    bd = B.bundle
    names = list(base_ring.visible)
    fnames = [f"d{g}" for g in names]
    # differentiate the relations in the free ring, where they are not yet zero
    free = Ring(names)
    frame_relations = []
    for lhs, rhs in bd.base_relations:
        rel = free.parse(f"({lhs}) - ({rhs})")
        entry = {}
        for i, part in free.partials(rel).items():
            c = Expr(free, part)
            if c:
                entry[fnames[i]] = str(c)
        frame_relations.append(entry)
    doc: dict = {
        "ring": {
            "generators": names,
            "laurent": [],
            "relations": [{"lhs": l, "rhs": r} for l, r in bd.base_relations],
            "denominators": list(bd.base_denominators),
        },
        "frame": {
            "names": fnames,
            "differential": {g: {f"d{g}": "1"} for g in names},
            "relations": frame_relations,
        },
        "poisson": {f"{u},{v}": str(val) for (u, v), val in brackets.items()},
        "connection": {
            f"{u}|d{v}": {f"d{g}": str(c) for g, c in val.items() if c} for (u, v), val in connection.items()
        },
    }
    if symmetry_table and bd.symmetry is not None:
        sym = bd.symmetry
        doc["fibre"] = {k: sym[k] for k in ("basis", "brackets", "cobracket") if k in sym}
        fields: dict[str, dict[str, str]] = {}
        for (u, xi), val in symmetry_table.items():
            fields.setdefault(xi, {})[u] = str(val)
        doc["action"] = {"chirality": sym.get("chirality", "right"), "fields": fields}
    return doc
