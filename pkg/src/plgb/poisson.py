"""Poisson brackets, the Schouten bracket of 1-forms and contravariant connections."""

from __future__ import annotations

from collections.abc import Mapping

from .calculus import Frame, OneForm, relation_polynomials
from .symkernel import Expr, Ring, RingError


class PoissonError(RingError):
    """Raised for malformed bracket or connection tables."""


def _pair_key(g: str, h: str) -> str:
    return f"{g},{h}"


class PoissonStructure:
    """An antisymmetric biderivation fixed by its values on generator pairs.

    ``table`` maps ``"g,h"`` to ``{g, h}``; the reverse order is implied.
    """

    def __init__(self, ring: Ring, table: Mapping[str, Expr | str]):
        self.ring = ring
        vis = ring.visible
        n = len(vis)
        zero = ring.zero()
        rows: dict[int, dict[int, Expr]] = {ring.index[g]: {} for g in vis}
        for key, value in table.items():
            parts = [p.strip() for p in key.split(",")]
            if len(parts) != 2 or any(p not in vis for p in parts):
                raise PoissonError(f"bracket key {key!r} must name two generators")
            g, h = parts
            val = value if isinstance(value, Expr) else ring.parse(value)
            if g == h:
                if not val.is_zero():
                    raise PoissonError(f"antisymmetry: {{{g},{g}}} must be 0, got {val}")
                continue
            i, j = ring.index[g], ring.index[h]
            if j in rows[i] and rows[i][j] != val:
                raise PoissonError(f"antisymmetry: {{{g},{h}}} given twice with different values")
            rows[i][j] = val
            rows[j][i] = -val
        # hidden inverse generators: {u, h} = -u^2 {D, h}
        self._rows = rows
        for k, den in enumerate(ring.denominators):
            ui = ring.index[f"inv_{k}"]
            u = ring.inverse_of(k)
            rows[ui] = {}
            for g in ring.generators[:n]:
                gi = ring.index[g]
                val = -(u * u) * self._bracket_with_gen(den, gi)
                if val:
                    rows[ui][gi] = val
                    rows[gi][ui] = -val
        self.rows = rows
        self._zero = zero

    def _bracket_with_gen(self, p: Expr, gi: int) -> Expr:
        """{p, g} for a generator g using the rows built so far."""
        acc = self.ring.zero()
        for i, part in self.ring.partials(p).items():
            val = self._rows.get(i, {}).get(gi)
            if val:
                acc = acc + Expr(self.ring, part) * val
        return acc

    def value(self, g: str, h: str) -> Expr:
        return self.rows[self.ring.index[g]].get(self.ring.index[h], self.ring.zero())

    def bracket(self, p: Expr, q: Expr) -> Expr:
        ring = self.ring
        dp = ring.partials(p)
        if not dp:
            return ring.zero()
        dq = ring.partials(q)
        acc = ring.zero()
        for i, pi_ in dp.items():
            row = self.rows.get(i, {})
            inner = ring.zero()
            for j, qj in dq.items():
                val = row.get(j)
                if val:
                    inner = inner + Expr(ring, qj) * val
            if inner:
                acc = acc + Expr(ring, pi_) * inner
        return acc

    def check(self) -> list[str]:
        """The table must annihilate every ring relation."""
        problems = []
        for name, rel in relation_polynomials(self.ring):
            for g in self.ring.visible:
                val = self.bracket(rel, self.ring.gen(g))
                if not val.is_zero():
                    problems.append(f"bracket does not annihilate relation {name!r} against {g}: {val}")
        return problems


def bracket(P: PoissonStructure, p: Expr, q: Expr) -> Expr:
    return P.bracket(p, q)


def jacobiator(P: PoissonStructure, p: Expr, q: Expr, r: Expr) -> Expr:
    b = P.bracket
    return b(p, b(q, r)) + b(q, b(r, p)) + b(r, b(p, q))


def pi(P: PoissonStructure, frame: Frame, eta: OneForm, tau: OneForm) -> Expr:
    """The Poisson bivector on a pair of 1-forms."""
    ring = frame.ring
    ea = frame.generator_expansion(eta)
    if not ea:
        return ring.zero()
    eb = frame.generator_expansion(tau)
    acc = ring.zero()
    for i, p in ea.items():
        row = P.rows.get(i, {})
        for j, q in eb.items():
            val = row.get(j)
            if val:
                acc = acc + p * q * val
    return acc


def schouten(P: PoissonStructure, eta: OneForm, tau: OneForm, frame: Frame | None = None) -> OneForm:
    """[p dg, q dh] = pq d{g,h} + p{g,q} dh - q{h,p} dg."""
    frame = frame or eta.frame
    ring = frame.ring
    ea = frame.generator_expansion(eta)
    eb = frame.generator_expansion(tau)
    gens = {i: ring.gen(ring.generators[i]) for i in set(ea) | set(eb)}
    # coefficients on the generator differentials, mapped to the frame once
    coeffs: dict[int, Expr] = {}

    def add(k: int, c: Expr) -> None:
        if c:
            coeffs[k] = coeffs[k] + c if k in coeffs else c

    g_brackets = {i: {j: P.bracket(gens[i], q) for j, q in eb.items()} for i in ea}
    h_brackets = {j: {i: P.bracket(gens[j], p) for i, p in ea.items()} for j in eb}
    for i, p in ea.items():
        for j, q in eb.items():
            gh = P.bracket(gens[i], gens[j])
            if gh:
                pq = p * q
                for k, part in ring.partials(gh).items():
                    add(k, Expr(ring, part) * pq)
            add(j, p * g_brackets[i][j])
            add(i, -(q * h_brackets[j][i]))
    acc = frame.zero()
    for k, c in coeffs.items():
        if c:
            acc = acc + frame.d_table[k] * c
    return acc


class ContravariantConnection:
    """Values of the connection on ``(generator differential, frame element)``."""

    def __init__(self, P: PoissonStructure, frame: Frame, table: Mapping[tuple[str, str], OneForm | Mapping[str, Expr | str]]):
        self.P = P
        self.frame = frame
        ring = frame.ring
        self.table: dict[tuple[int, int], OneForm] = {}
        for (g, e), value in table.items():
            if g not in ring.visible:
                raise PoissonError(f"connection entry names unknown generator {g!r}")
            if e not in frame.index:
                raise PoissonError(f"connection entry names unknown frame element {e!r}")
            form = value if isinstance(value, OneForm) else frame.form(value)
            self.table[(ring.index[g], frame.index[e])] = form
        for k, den in enumerate(ring.denominators):
            ui = ring.index[f"inv_{k}"]
            u = ring.inverse_of(k)
            expansion = {i: Expr(ring, part) for i, part in ring.partials(den).items()}
            for j in range(frame.dim):
                total = frame.zero()
                for i, coeff in expansion.items():
                    total = total + self._entry(i, j) * coeff
                self.table[(ui, j)] = total * (-(u * u))

    def _entry(self, gi: int, j: int) -> OneForm:
        return self.table.get((gi, j)) or self.frame.zero()

    def along_generator(self, gi: int, tau: OneForm) -> OneForm:
        """The connection along d(g) applied to tau."""
        frame = self.frame
        g = frame.ring.gen(frame.ring.generators[gi])
        acc = frame.zero()
        for j, c in enumerate(tau.coords):
            if not c:
                continue
            acc = acc + frame.element(frame.names[j]) * self.P.bracket(g, c) + self._entry(gi, j) * c
        return acc

    def apply(self, eta: OneForm, tau: OneForm) -> OneForm:
        acc = self.frame.zero()
        for gi, p in self.frame.generator_expansion(eta).items():
            acc = acc + self.along_generator(gi, tau) * p
        return acc

    def check(self) -> list[str]:
        """Well-definedness: the connection must kill relation differentials in both slots."""
        frame, ring = self.frame, self.frame.ring
        problems = []
        directions: list[tuple[str, dict[int, Expr]]] = []
        for name, rel in relation_polynomials(ring):
            directions.append((name, {i: Expr(ring, part) for i, part in ring.partials(rel).items()}))
        for k, rel in enumerate(frame.relations):
            form = OneForm(frame, rel)
            directions.append((f"frame relation {k}", frame.generator_expansion(form)))
        if frame.in_differentials is not None:
            # the direction slot must respect the frame round trip as well
            for gi in range(len(ring.visible)):
                via = frame.generator_expansion(frame.d_table[gi])
                via[gi] = via.get(gi, ring.zero()) - 1
                directions.append((f"d({ring.visible[gi]}) through the frame", via))
        for name, expansion in directions:
            for j, e in enumerate(frame.names):
                total = frame.zero()
                for gi, coeff in expansion.items():
                    if coeff:
                        total = total + self._entry(gi, j) * coeff
                if not total.is_zero():
                    problems.append(f"connection along {name} is nonzero on {e}: {total}")
        for k, rel in enumerate(frame.relations):
            form = OneForm(frame, rel)
            for g in ring.visible:
                val = self.along_generator(ring.index[g], form)
                if not val.is_zero():
                    problems.append(f"connection along d({g}) does not kill frame relation {k}: {val}")
        return problems


def connection_apply(C: ContravariantConnection, P: PoissonStructure, eta: OneForm, tau: OneForm, frame: Frame | None = None) -> OneForm:
    if P is not C.P:
        raise PoissonError("connection was built over a different Poisson structure")
    return C.apply(eta, tau)


def compatibility_defect(C: ContravariantConnection, P: PoissonStructure, eta: OneForm, tau: OneForm, frame: Frame | None = None) -> OneForm:
    return C.apply(eta, tau) - C.apply(tau, eta) - schouten(P, eta, tau, frame)


def curvature(C: ContravariantConnection, P: PoissonStructure, eta: OneForm, tau: OneForm, sigma: OneForm, frame: Frame | None = None) -> OneForm:
    return C.apply(eta, C.apply(tau, sigma)) - C.apply(tau, C.apply(eta, sigma)) - C.apply(schouten(P, eta, tau, frame), sigma)
