"""Frames, 1-forms, 2-forms and vector fields over a :class:`~plgb.symkernel.Ring`.

A frame is a list of named 1-forms together with the differential of every
generator written in that frame.  Frames come in two flavours:

* a genuine basis (``SU_2``: e0, ep, em) given by ``in_differentials`` which
  expresses each frame element as a sum of ``p * d(gen)``;
* an overcomplete set of exact forms subject to linear ``relations``
  (the base sphere: dz, dzs, dx with ``zs dz + z dzs + (2x-1) dx = 0``).

All coordinate tuples are aligned with ``Frame.names``.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from fractions import Fraction

from .symkernel import Expr, Ring, RingError


class FrameError(RingError):
    """Raised when frame data is inconsistent."""


class Frame:
    def __init__(
        self,
        ring: Ring,
        names: Sequence[str],
        differential: Mapping[str, Mapping[str, Expr | str]],
        in_differentials: Mapping[str, Sequence[tuple[Expr | str, str]]] | None = None,
        d2: Mapping[str, Mapping[tuple[str, str], Expr | str]] | None = None,
        relations: Sequence[Mapping[str, Expr | str]] = (),
    ):
        self.ring = ring
        self.names: tuple[str, ...] = tuple(names)
        if len(set(self.names)) != len(self.names):
            raise FrameError(f"duplicate frame names in {list(names)}")
        self.index = {n: i for i, n in enumerate(self.names)}
        self.dim = len(self.names)

        def ex(v):
            return v if isinstance(v, Expr) else ring.parse(v)

        self.relations: tuple[tuple[Expr, ...], ...] = tuple(
            self._coords_from_map(rel, ex, "relation") for rel in relations
        )
        self._eliminators = [self._eliminator(k, rel) for k, rel in enumerate(self.relations)]

        table: dict[int, OneForm] = {}
        for g in ring.visible:
            if g not in differential:
                raise FrameError(f"differential table misses generator {g!r}")
            table[ring.index[g]] = OneForm(self, self._coords_from_map(differential[g], ex, f"d({g})"))
        extra = set(differential) - set(ring.visible)
        if extra:
            raise FrameError(f"differential table names unknown generators {sorted(extra)}")
        self.d_table = table
        for k, den in enumerate(ring.denominators):
            u = ring.inverse_of(k)
            self.d_table[ring.index[f"inv_{k}"]] = self.differential(den) * (-(u * u))

        self.in_differentials: dict[str, tuple[tuple[Expr, str], ...]] | None = None
        if in_differentials is None and self.dim != len(ring.visible):
            raise FrameError("a frame that is not made of generator differentials needs in_differentials")
        if in_differentials is not None:
            conv = {}
            for name in self.names:
                if name not in in_differentials:
                    raise FrameError(f"in_differentials misses frame element {name!r}")
                pairs = []
                for coeff, gen in in_differentials[name]:
                    if gen not in ring.visible:
                        raise FrameError(f"in_differentials for {name!r} names unknown generator {gen!r}")
                    pairs.append((ex(coeff), gen))
                conv[name] = tuple(pairs)
            self.in_differentials = conv

        self.d2: dict[int, TwoForm] | None = None
        if d2 is not None:
            self.d2 = {}
            for name in self.names:
                entries = d2.get(name, {})
                coords = {}
                for pair, v in entries.items():
                    i, j = (self.index[p] for p in pair)
                    if i == j:
                        raise FrameError(f"d2 entry for {name!r} has a diagonal pair {pair}")
                    coords[(i, j)] = ex(v)
                self.d2[self.index[name]] = TwoForm.from_pairs(self, coords)

    # ------------------------------------------------------------------
    def _coords_from_map(self, m: Mapping[str, Expr | str], ex, where: str) -> tuple[Expr, ...]:
        for k in m:
            if k not in self.index:
                raise FrameError(f"{where}: unknown frame name {k!r}")
        return tuple(ex(m[n]) if n in m else self.ring.zero() for n in self.names)

    def _eliminator(self, k: int, rel: tuple[Expr, ...]) -> tuple[int, Expr]:
        """Choose the frame slot a relation solves for, and the inverse of its coefficient."""
        ring = self.ring
        for i, c in enumerate(rel):
            if c.is_constant() and not c.is_zero():
                return i, ring.const(1 / c.constant_value())
        # otherwise the coefficient must be a rational multiple of a declared denominator
        for i, c in enumerate(rel):
            for j, den in enumerate(ring.denominators):
                mono, lead = next(iter(den.terms.items()))
                if mono not in c.terms:
                    continue
                factor = Fraction(c.terms[mono]) / lead
                if (c - den * factor).is_zero():
                    return i, ring.inverse_of(j) * (1 / factor)
        raise FrameError(
            f"frame relation {k} has no coefficient that is constant or a declared denominator"
        )

    def is_exact_frame(self) -> bool:
        """True when frame element i is d of visible generator i."""
        return self.in_differentials is None

    def zero(self) -> OneForm:
        return OneForm(self, (self.ring.zero(),) * self.dim)

    def element(self, name: str) -> OneForm:
        i = self.index[name]
        return OneForm(self, tuple(self.ring.one() if j == i else self.ring.zero() for j in range(self.dim)))

    def form(self, coords: Mapping[str, Expr | str]) -> OneForm:
        return OneForm(self, self._coords_from_map(coords, lambda v: v if isinstance(v, Expr) else self.ring.parse(v), "form"))

    # ------------------------------------------------------------------
    def differential(self, p: Expr) -> OneForm:
        acc = [self.ring.zero()] * self.dim
        for i, part in self.ring.partials(p).items():
            coeff = Expr(self.ring, part)
            if coeff.is_zero():
                continue
            dg = self.d_table[i]
            for j in range(self.dim):
                if dg.coords[j]:
                    acc[j] = acc[j] + coeff * dg.coords[j]
        return OneForm(self, tuple(acc))

    def generator_expansion(self, eta: OneForm) -> dict[int, Expr]:
        """Coefficients ``P_g`` with ``eta = sum P_g d(g)`` over visible generators."""
        ring = self.ring
        out: dict[int, Expr] = {}
        if self.in_differentials is None:
            for g, c in zip(ring.visible, eta.coords):
                if c:
                    out[ring.index[g]] = c
            return out
        for name, c in zip(self.names, eta.coords):
            if not c:
                continue
            for coeff, gen in self.in_differentials[name]:
                gi = ring.index[gen]
                out[gi] = out.get(gi, ring.zero()) + c * coeff
        return {g: v for g, v in out.items() if v}

    def check_round_trip(self) -> list[str]:
        problems = []
        if self.in_differentials is None:
            return problems
        for name in self.names:
            total = self.zero()
            for coeff, gen in self.in_differentials[name]:
                total = total + self.d_table[self.ring.index[gen]] * coeff
            if total != self.element(name):
                problems.append(f"frame element {name!r} does not round-trip: got {total}")
        return problems

    def check_relations(self) -> list[str]:
        """d applied to each ring relation must vanish."""
        problems = []
        for name, rel in relation_polynomials(self.ring):
            form = self.differential(rel)
            if not form.is_zero():
                problems.append(f"d does not annihilate relation {name!r}: {form}")
        return problems

    def check_d2(self) -> list[str]:
        """Compare the supplied structure equations with d of in_differentials."""
        if self.d2 is None:
            return []
        problems = []
        for name in self.names:
            i = self.index[name]
            if self.in_differentials is None:
                oracle = TwoForm.zero(self)
            else:
                oracle = TwoForm.zero(self)
                for coeff, gen in self.in_differentials[name]:
                    oracle = oracle + wedge(self.differential(coeff), self.d_table[self.ring.index[gen]])
            if oracle != self.d2[i]:
                problems.append(f"structure equation for {name!r} disagrees: expected {oracle}, got {self.d2[i]}")
        return problems

    def dual_fields(self) -> dict[str, VectorField]:
        """Vector fields dual to the frame, read off from the d-table."""
        if self.relations:
            raise FrameError("dual fields are undefined for an overcomplete frame")
        out = {}
        for j, name in enumerate(self.names):
            values = {g: self.d_table[self.ring.index[g]].coords[j] for g in self.ring.visible}
            out[name] = VectorField(self, values)
        return out


def relation_polynomials(ring: Ring) -> list[tuple[str, Expr]]:
    """Each user relation as an unnormalized polynomial ``lhs - rhs``."""
    out = []
    for rule in ring.rules[: len(ring.relation_strings)]:
        lhs = Expr(ring, {rule.lhs: Fraction(1)}, normalize=False)
        out.append((rule.name, lhs - Expr(ring, dict(rule.rhs), normalize=False)))
    return out


class OneForm:
    """A 1-form with coordinates aligned to ``frame.names``."""

    __slots__ = ("frame", "coords")

    def __init__(self, frame: Frame, coords: Sequence[Expr]):
        if len(coords) != frame.dim:
            raise FrameError(f"expected {frame.dim} coordinates, got {len(coords)}")
        self.frame = frame
        self.coords: tuple[Expr, ...] = tuple(coords)

    def _check(self, other: OneForm) -> None:
        if not isinstance(other, OneForm) or other.frame is not self.frame:
            raise FrameError("1-forms over different frames")

    def __add__(self, other: OneForm) -> OneForm:
        self._check(other)
        return OneForm(self.frame, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: OneForm) -> OneForm:
        self._check(other)
        return OneForm(self.frame, tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> OneForm:
        return OneForm(self.frame, tuple(-a for a in self.coords))

    def __mul__(self, p) -> OneForm:
        if isinstance(p, (Expr, int, Fraction)):
            return OneForm(self.frame, tuple(c * p for c in self.coords))
        return NotImplemented

    __rmul__ = __mul__

    def canonical(self) -> tuple[Expr, ...]:
        """Coordinates with each frame relation used to clear its eliminated slot."""
        coords = list(self.coords)
        for rel, (slot, inv) in zip(self.frame.relations, self.frame._eliminators):
            c = coords[slot]
            if not c:
                continue
            factor = c * inv
            coords = [x - factor * r for x, r in zip(coords, rel)]
        return tuple(coords)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.canonical())

    def __eq__(self, other):
        if not isinstance(other, OneForm):
            return NotImplemented
        return other.frame is self.frame and (self - other).is_zero()

    def __hash__(self):
        return hash(self.canonical())

    def coeff(self, name: str) -> Expr:
        return self.coords[self.frame.index[name]]

    def as_dict(self) -> dict[str, str]:
        return {n: str(c) for n, c in zip(self.frame.names, self.coords) if c}

    def __str__(self) -> str:
        parts = [f"({c})*{n}" for n, c in zip(self.frame.names, self.coords) if c]
        return " + ".join(parts) if parts else "0"

    __repr__ = __str__


class TwoForm:
    """A 2-form stored on pairs (i, j) with i < j."""

    __slots__ = ("frame", "coords")

    def __init__(self, frame: Frame, coords: Mapping[tuple[int, int], Expr]):
        self.frame = frame
        self.coords = {k: v for k, v in coords.items() if v}

    @classmethod
    def zero(cls, frame: Frame) -> TwoForm:
        return cls(frame, {})

    @classmethod
    def from_pairs(cls, frame: Frame, coords: Mapping[tuple[int, int], Expr]) -> TwoForm:
        acc: dict[tuple[int, int], Expr] = {}
        for (i, j), v in coords.items():
            if i == j:
                continue
            key, sign = ((i, j), 1) if i < j else ((j, i), -1)
            acc[key] = acc.get(key, frame.ring.zero()) + v * sign
        return cls(frame, acc)

    def __add__(self, other: TwoForm) -> TwoForm:
        acc = dict(self.coords)
        for k, v in other.coords.items():
            acc[k] = acc.get(k, self.frame.ring.zero()) + v
        return TwoForm(self.frame, acc)

    def __neg__(self) -> TwoForm:
        return TwoForm(self.frame, {k: -v for k, v in self.coords.items()})

    def __sub__(self, other: TwoForm) -> TwoForm:
        return self + (-other)

    def __mul__(self, p) -> TwoForm:
        return TwoForm(self.frame, {k: v * p for k, v in self.coords.items()})

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        if self.frame.relations:
            raise FrameError("2-forms over an overcomplete frame are not supported")
        return not self.coords

    def __eq__(self, other):
        if not isinstance(other, TwoForm):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        return hash(frozenset(self.coords.items()))

    def __str__(self) -> str:
        names = self.frame.names
        parts = [f"({v})*{names[i]}^{names[j]}" for (i, j), v in sorted(self.coords.items())]
        return " + ".join(parts) if parts else "0"

    __repr__ = __str__


class VectorField:
    """A derivation given on generators; frame pairings follow from the frame."""

    def __init__(self, frame: Frame, values: Mapping[str, Expr | str]):
        ring = frame.ring
        self.frame = frame
        self.values: dict[str, Expr] = {}
        for g in ring.visible:
            v = values.get(g, ring.zero())
            self.values[g] = v if isinstance(v, Expr) else ring.parse(v)
        extra = set(values) - set(ring.visible)
        if extra:
            raise FrameError(f"vector field names unknown generators {sorted(extra)}")
        self.derivation = ring.derivation(self.values)
        self.pairings = self._pairings()

    def _pairings(self) -> tuple[Expr, ...]:
        frame = self.frame
        if frame.in_differentials is None:
            return tuple(self.values[g] for g in frame.ring.visible)
        out = []
        for name in frame.names:
            total = frame.ring.zero()
            for coeff, gen in frame.in_differentials[name]:
                total = total + coeff * self.values[gen]
            out.append(total)
        return tuple(out)

    def __call__(self, p: Expr) -> Expr:
        return self.derivation(p)

    def check(self) -> list[str]:
        """Well-definedness on the quotient and pairing consistency."""
        problems = [
            f"field does not annihilate relation {name!r}: {val}"
            for name, val in self.derivation.relation_defects()[: len(self.frame.ring.relation_strings)]
            if not val.is_zero()
        ]
        for g in self.frame.ring.visible:
            via = interior(self, self.frame.d_table[self.frame.ring.index[g]])
            if via != self.values[g]:
                problems.append(f"pairing with d({g}) gives {via}, field value is {self.values[g]}")
        for k, rel in enumerate(self.frame.relations):
            val = interior(self, OneForm(self.frame, rel))
            if not val.is_zero():
                problems.append(f"field does not annihilate frame relation {k}: {val}")
        return problems

    def scaled(self, c) -> VectorField:
        return VectorField(self.frame, {g: v * c for g, v in self.values.items()})

    def __add__(self, other: VectorField) -> VectorField:
        return VectorField(self.frame, {g: self.values[g] + other.values[g] for g in self.values})


def differential(p: Expr, frame: Frame) -> OneForm:
    return frame.differential(p)


def oneform_from_pdq(p: Expr, q: Expr, frame: Frame) -> OneForm:
    return frame.differential(q) * p


def interior(V: VectorField, eta: OneForm) -> Expr:
    total = eta.frame.ring.zero()
    for c, pv in zip(eta.coords, V.pairings):
        if c and pv:
            total = total + c * pv
    return total


def wedge(eta: OneForm, tau: OneForm) -> TwoForm:
    coords: dict[tuple[int, int], Expr] = {}
    zero = eta.frame.ring.zero()
    for i, a in enumerate(eta.coords):
        if not a:
            continue
        for j, b in enumerate(tau.coords):
            if i == j or not b:
                continue
            key, sign = ((i, j), 1) if i < j else ((j, i), -1)
            coords[key] = coords.get(key, zero) + a * b * sign
    return TwoForm(eta.frame, coords)


def interior_two_form(V: VectorField, omega: TwoForm) -> OneForm:
    """i_V on a 2-form: i_V(e^i ^ e^j) = V^i e^j - V^j e^i."""
    frame = omega.frame
    acc = [frame.ring.zero()] * frame.dim
    for (i, j), c in omega.coords.items():
        acc[j] = acc[j] + c * V.pairings[i]
        acc[i] = acc[i] - c * V.pairings[j]
    return OneForm(frame, acc)


def interior2(V: VectorField, W: VectorField, omega: TwoForm) -> Expr:
    """Bivector contraction with interior2(V, W, eta^tau) = i_V(eta) i_W(tau) - i_W(eta) i_V(tau)."""
    total = omega.frame.ring.zero()
    for (i, j), c in omega.coords.items():
        total = total + c * (V.pairings[i] * W.pairings[j] - W.pairings[i] * V.pairings[j])
    return total


def d_oneform(eta: OneForm) -> TwoForm:
    """Exterior derivative of a 1-form via the structure equations."""
    frame = eta.frame
    if frame.d2 is None:
        raise FrameError("d on 1-forms needs the structure equations (d2 block)")
    total = TwoForm.zero(frame)
    for i, c in enumerate(eta.coords):
        if not c:
            continue
        total = total + wedge(frame.differential(c), frame.element(frame.names[i]))
        total = total + frame.d2[i] * c
    return total


def lie_derivative(
    V: VectorField,
    eta: OneForm,
    frame: Frame | None = None,
    table: Mapping[str, OneForm] | None = None,
) -> OneForm:
    """L_V(eta), from a per-frame-element table if given, else by the Cartan formula."""
    frame = frame or eta.frame
    acc = frame.zero()
    for i, c in enumerate(eta.coords):
        if not c:
            continue
        name = frame.names[i]
        if table is not None:
            if name not in table:
                raise FrameError(f"lie derivative table misses frame element {name!r}")
            on_e = table[name]
        else:
            on_e = cartan_on_frame(V, frame, i)
        acc = acc + frame.element(name) * V(c) + on_e * c
    return acc


def cartan_on_frame(V: VectorField, frame: Frame, i: int) -> OneForm:
    if frame.d2 is None:
        if frame.in_differentials is None:
            # exact frame element d(g): L_V d(g) = d(V(g))
            return frame.differential(V.values[frame.ring.visible[i]])
        raise FrameError("Cartan formula needs the structure equations (d2 block)")
    return interior_two_form(V, frame.d2[i]) + frame.differential(V.pairings[i])
