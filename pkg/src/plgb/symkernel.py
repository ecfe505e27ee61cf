"""Exact polynomial arithmetic over the rationals.

Expressions live in a :class:`Ring`: named commuting generators, some of which
may carry negative exponents (Laurent generators), a list of oriented rewrite
rules ``leading monomial -> replacement`` describing the quotient, and a set of
declared denominators.  Each denominator ``D`` gets a hidden generator ``u``
together with the rule ``u * lm(D) -> (1 - u * (D - lc*lm)) / lc`` so that
``u * D`` reduces to 1.

Every :class:`Expr` is kept in normal form, so ``==`` is equality in the ring.
"""

from __future__ import annotations

import ast
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Monomial = tuple[int, ...]
Terms = dict[Monomial, Fraction]
Scalar = Union[int, Fraction]

DEFAULT_STEP_BOUND = 200_000


class RingError(ValueError):
    """Raised for malformed rings, mixed-ring arithmetic or bad input."""


class NormalizationError(RingError):
    """Rewriting did not terminate within the step bound."""


def _mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    return tuple(a + b for a, b in zip(m1, m2))


def _coef(value) -> Fraction | int:
    """Integral coefficients are kept as int, which makes arithmetic much cheaper."""
    return value.numerator if value.denominator == 1 else value


def _add_term(acc: Terms, mono: Monomial, coeff: Fraction) -> None:
    value = acc.get(mono, 0) + coeff
    if value:
        acc[mono] = _coef(value)
    else:
        acc.pop(mono, None)


@dataclass(frozen=True)
class Rule:
    name: str
    lhs: Monomial
    rhs: tuple[tuple[Monomial, Fraction], ...]

    def divides(self, mono: Monomial) -> bool:
        return all(m >= l for m, l in zip(mono, self.lhs))


class Ring:
    """A commutative ring Q[gens, laurent^-1] / (rules), localized at denominators.

    ``relations`` are pairs ``(lhs, rhs)`` of expression strings where ``lhs``
    must be a single monomial with coefficient 1.
    """

    def __init__(
        self,
        generators: Sequence[str],
        laurent: Iterable[str] = (),
        relations: Sequence[tuple[str, str]] = (),
        denominators: Sequence[str] = (),
        identity_point: Mapping[str, Scalar] | None = None,
        step_bound: int = DEFAULT_STEP_BOUND,
    ):
        names = list(generators)
        if len(set(names)) != len(names):
            raise RingError(f"duplicate generator names in {names}")
        for name in names:
            if not name.isidentifier():
                raise RingError(f"generator name {name!r} is not an identifier")
        self.visible: tuple[str, ...] = tuple(names)
        self.laurent = frozenset(laurent)
        unknown = self.laurent - set(names)
        if unknown:
            raise RingError(f"laurent generators {sorted(unknown)} are not generators")
        self.step_bound = step_bound
        self.denominator_strings = tuple(denominators)
        self.relation_strings = tuple(relations)
        # hidden inverse generators are appended after the visible ones
        self.generators: tuple[str, ...] = self.visible + tuple(
            f"inv_{k}" for k in range(len(denominators))
        )
        self.index = {g: i for i, g in enumerate(self.generators)}
        self.nvars = len(self.generators)
        self.rules: tuple[Rule, ...] = ()
        self._laurent_mask = tuple(g in self.laurent for g in self.generators)

        rules = []
        for k, (lhs_s, rhs_s) in enumerate(relations):
            lhs = self._parse_raw(lhs_s)
            if len(lhs) != 1 or next(iter(lhs.values())) != 1:
                raise RingError(f"relation {k}: lhs {lhs_s!r} must be a monic monomial")
            (lm,) = lhs
            if any(e < 0 for e in lm) or not any(lm):
                raise RingError(f"relation {k}: lhs {lhs_s!r} must be a positive monomial")
            if any(lm[self.index[g]] for g in self.laurent):
                raise RingError(f"relation {k}: lhs {lhs_s!r} may not involve laurent generators")
            rhs = self._parse_raw(rhs_s)
            rules.append(Rule(f"{lhs_s} -> {rhs_s}", lm, tuple((m, _coef(c)) for m, c in rhs.items())))
        self.rules = tuple(rules)

        self.denominators: tuple[Expr, ...] = ()
        dens = []
        for k, den_s in enumerate(denominators):
            den = self.parse(den_s)
            if den.is_zero():
                raise RingError(f"denominator {den_s!r} normalizes to zero")
            if any(m[len(self.visible):] != (0,) * len(denominators) for m in den.terms):
                raise RingError(f"denominator {den_s!r} may not involve inverses")
            lm = max(den.terms, key=lambda m: (sum(m), m))
            lc = den.terms[lm]
            u = self.index[f"inv_{k}"]
            lhs = tuple(e + (1 if i == u else 0) for i, e in enumerate(lm))
            rhs: Terms = {(0,) * self.nvars: Fraction(1) / lc}
            for m, c in den.terms.items():
                if m != lm:
                    _add_term(rhs, tuple(e + (1 if i == u else 0) for i, e in enumerate(m)), -Fraction(c) / lc)
            rules.append(Rule(f"inv_{k} * ({den_s}) -> 1", lhs, tuple((m, _coef(c)) for m, c in rhs.items())))
            dens.append(den)
        self.rules = tuple(rules)
        self.denominators = tuple(dens)
        self._check_rules()

        self.identity_point: dict[str, Fraction] = {}
        for g, v in (identity_point or {}).items():
            if g not in self.index:
                raise RingError(f"identity point names unknown generator {g!r}")
            self.identity_point[g] = Fraction(v)

    def _check_rules(self) -> None:
        seen = {}
        for rule in self.rules:
            if rule.lhs in seen:
                raise RingError(f"rules {seen[rule.lhs]!r} and {rule.name!r} share a leading monomial")
            seen[rule.lhs] = rule.name
            for m, _ in rule.rhs:
                if rule.divides(m):
                    raise RingError(f"rule {rule.name!r}: replacement contains its own leading monomial")

    def __repr__(self) -> str:
        return f"Ring({list(self.visible)}, rules={len(self.rules)})"

    # ------------------------------------------------------------------
    # construction helpers
    def zero(self) -> Expr:
        return Expr(self, {})

    def one(self) -> Expr:
        return self.const(1)

    def const(self, value: Scalar) -> Expr:
        value = Fraction(value)
        return Expr(self, {(0,) * self.nvars: value} if value else {})

    def gen(self, name: str) -> Expr:
        try:
            i = self.index[name]
        except KeyError:
            raise RingError(f"unknown generator {name!r}") from None
        return Expr(self, {tuple(1 if j == i else 0 for j in range(self.nvars)): Fraction(1)})

    def gens(self) -> list[Expr]:
        return [self.gen(g) for g in self.visible]

    def monomial(self, mono: Monomial, coeff: Scalar = 1) -> Expr:
        return Expr(self, {tuple(mono): Fraction(coeff)})

    def inverse_of(self, k: int) -> Expr:
        return self.gen(f"inv_{k}")

    def parse(self, text: str | Scalar) -> Expr:
        if isinstance(text, (int, Fraction)):
            return self.const(text)
        return Expr(self, self._parse_raw(text))

    def _parse_raw(self, text: str) -> Terms:
        return _ExprParser(self).parse(text)

    # ------------------------------------------------------------------
    # normal forms
    def _find_rule(self, mono: Monomial, rules: Sequence[Rule]) -> Rule | None:
        for rule in rules:
            if rule.divides(mono):
                return rule
        return None

    def normalize_terms(self, terms: Mapping[Monomial, Fraction], rule_order: Sequence[int] | None = None) -> Terms:
        """Exhaustively rewrite ``terms``; returns a fresh normalized dict."""
        rules = self.rules if rule_order is None else [self.rules[i] for i in rule_order]
        for m in terms:
            if any(e < 0 and not lm for e, lm in zip(m, self._laurent_mask)):
                raise RingError(f"negative exponent on non-laurent generator in {self._fmt_mono(m)}")
        if not rules:
            return {m: c for m, c in terms.items() if c}
        out: Terms = {}
        current: Terms = {m: _coef(Fraction(c)) for m, c in terms.items() if c}
        steps = 0
        recent: list[str] = []
        while current:
            nxt: Terms = {}
            for mono, coeff in current.items():
                rule = self._find_rule(mono, rules)
                if rule is None:
                    _add_term(out, mono, coeff)
                    continue
                steps += 1
                if steps > self.step_bound:
                    chain = " ; ".join(recent[-6:])
                    raise NormalizationError(
                        f"rewriting exceeded {self.step_bound} steps; last rules applied: {chain}"
                    )
                if not recent or recent[-1] != rule.name:
                    recent.append(rule.name)
                quotient = tuple(m - l for m, l in zip(mono, rule.lhs))
                for rm, rc in rule.rhs:
                    _add_term(nxt, _mono_mul(quotient, rm), coeff * rc)
            current = nxt
        return out

    def is_normal(self, mono: Monomial) -> bool:
        return self._find_rule(mono, self.rules) is None

    # ------------------------------------------------------------------
    # derivations
    def partials(self, e: Expr) -> dict[int, Terms]:
        """Formal partial derivatives of the stored representative (unnormalized)."""
        out: dict[int, Terms] = {}
        for mono, coeff in e.terms.items():
            for i, k in enumerate(mono):
                if k:
                    m = list(mono)
                    m[i] -= 1
                    _add_term(out.setdefault(i, {}), tuple(m), coeff * k)
        return out

    def extend_table(self, table: Mapping[int, Expr], apply) -> dict[int, Expr]:
        """Extend a per-generator derivation table to the hidden inverse generators.

        ``apply(table, e)`` evaluates the derivation; for ``u = 1/D`` the value
        is ``-u^2 * apply(D)``.
        """
        full = dict(table)
        for k, den in enumerate(self.denominators):
            u = self.inverse_of(k)
            full[self.index[f"inv_{k}"]] = -(u * u) * apply(full, den)
        return full

    def derive(self, table: Mapping[int, Expr], e: Expr) -> Expr:
        """Apply the derivation with generator values ``table`` (indexed by position)."""
        acc: Terms = {}
        for i, part in self.partials(e).items():
            value = table.get(i)
            if value is None or not value.terms:
                continue
            for pm, pc in part.items():
                for vm, vc in value.terms.items():
                    _add_term(acc, _mono_mul(pm, vm), pc * vc)
        return Expr(self, acc)

    def derivation(self, values: Mapping[str, Expr | str]) -> Derivation:
        return Derivation.from_values(self, values)

    # ------------------------------------------------------------------
    def evaluate(self, e: Expr, point: Mapping[str, Scalar]) -> Fraction:
        """Evaluate at a point given on the visible generators (inverses follow)."""
        values = [Fraction(0)] * self.nvars
        for g in self.visible:
            if g not in point:
                raise RingError(f"evaluation point misses generator {g!r}")
            values[self.index[g]] = Fraction(point[g])
        for k, den in enumerate(self.denominators):
            # denominators never involve inverses, so the visible values suffice
            dv = self._evaluate_terms(den.terms, values)
            if dv == 0:
                raise RingError(f"denominator {self.denominator_strings[k]!r} vanishes at the point")
            values[self.index[f"inv_{k}"]] = 1 / dv
        return self._evaluate_terms(e.terms, values)

    @staticmethod
    def _evaluate_terms(terms: Mapping[Monomial, Fraction], values: Sequence[Fraction]) -> Fraction:
        total = Fraction(0)
        for mono, coeff in terms.items():
            term = coeff
            for v, k in zip(values, mono):
                if k:
                    term *= v**k
            total += term
        return total

    def _fmt_mono(self, mono: Monomial) -> str:
        parts = []
        for g, k in zip(self.generators, mono):
            if k == 1:
                parts.append(g)
            elif k:
                parts.append(f"{g}^{k}")
        return "*".join(parts)


class Derivation:
    """A derivation of a ring given by its values on the generators."""

    def __init__(self, ring: Ring, table: Mapping[int, Expr]):
        self.ring = ring
        self.table = ring.extend_table(table, ring.derive)

    @classmethod
    def from_values(cls, ring: Ring, values: Mapping[str, Expr | str]) -> Derivation:
        table = {}
        for g, v in values.items():
            if g not in ring.index or g not in ring.visible:
                raise RingError(f"derivation value for unknown generator {g!r}")
            table[ring.index[g]] = v if isinstance(v, Expr) else ring.parse(v)
        return cls(ring, table)

    def __call__(self, e: Expr) -> Expr:
        return self.ring.derive(self.table, e)

    def value(self, name: str) -> Expr:
        return self.table.get(self.ring.index[name], self.ring.zero())

    def relation_defects(self) -> list[tuple[str, Expr]]:
        """Values on each rewrite rule's defining polynomial; all zero iff well defined."""
        out = []
        for rule in self.ring.rules:
            rel = Expr(self.ring, {rule.lhs: Fraction(1)}, normalize=False) - Expr(
                self.ring, dict(rule.rhs), normalize=False
            )
            out.append((rule.name, self.ring.derive(self.table, rel)))
        return out


def derivation_apply(table: Mapping[str, Expr | str], e: Expr) -> Expr:
    """Leibniz-extend generator values ``table`` to ``e``; checks the ring relations."""
    der = Derivation.from_values(e.ring, table)
    missing = [g for g in e.ring.visible if g not in table]
    if missing:
        raise RingError(f"derivation table misses generators {missing}")
    for name, value in der.relation_defects():
        if not value.is_zero():
            raise RingError(f"derivation does not annihilate relation {name!r}: {value}")
    return der(e)


class Expr:
    """A normalized ring element; immutable."""

    __slots__ = ("ring", "terms", "_hash")

    def __init__(self, ring: Ring, terms: Mapping[Monomial, Fraction], normalize: bool = True):
        self.ring = ring
        self.terms: Terms = ring.normalize_terms(terms) if normalize else dict(terms)
        self._hash = None

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other) -> Expr:
        if isinstance(other, Expr):
            if other.ring is not self.ring:
                raise RingError("arithmetic between expressions of different rings")
            return other
        if isinstance(other, (int, Fraction)):
            return self.ring.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc = dict(self.terms)
        for m, c in other.terms.items():
            _add_term(acc, m, c)
        return Expr(self.ring, acc, normalize=False)

    __radd__ = __add__

    def __neg__(self):
        return Expr(self.ring, {m: -c for m, c in self.terms.items()}, normalize=False)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Fraction(other)
            if not other:
                return self.ring.zero()
            return Expr(self.ring, {m: _coef(c * other) for m, c in self.terms.items()}, normalize=False)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc: Terms = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                _add_term(acc, _mono_mul(m1, m2), c1 * c2)
        return Expr(self.ring, acc)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (1 / Fraction(other))
        return NotImplemented

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            if len(self.terms) != 1:
                raise RingError("only monomials in laurent generators can be inverted")
            ((m, c),) = self.terms.items()
            if any(k and not lm for k, lm in zip(m, self.ring._laurent_mask)):
                raise RingError(f"{self} is not invertible in the ring")
            inv = self.ring.monomial(tuple(-k for k in m), 1 / c)
            return inv ** (-n)
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- predicates -------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(m) for m in self.terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise RingError(f"{self} is not constant")
        return Fraction(self.terms.get((0,) * self.ring.nvars, 0))

    def degree(self) -> int:
        return max((sum(abs(k) for k in m) for m in self.terms), default=0)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ring.const(other)
        if not isinstance(other, Expr):
            return NotImplemented
        return self.ring is other.ring and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    # -- display ----------------------------------------------------------
    def sorted_terms(self) -> list[tuple[Monomial, Fraction]]:
        return sorted(self.terms.items(), key=lambda t: (-sum(t[0]), tuple(-k for k in t[0])))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for mono, coeff in self.sorted_terms():
            body = self.ring._fmt_mono(mono)
            mag = abs(coeff)
            if not body:
                text = str(mag)
            elif mag == 1:
                text = body
            else:
                text = f"{mag}*{body}"
            sign = "-" if coeff < 0 else "+"
            pieces.append((sign, text))
        first_sign, first = pieces[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, text in pieces[1:]:
            out += f" {sign} {text}"
        return out

    def __repr__(self) -> str:
        return f"Expr({self})"


def normalize(e: Expr, ring: Ring | None = None, rule_order: Sequence[int] | None = None) -> Expr:
    """Re-normalize ``e`` (optionally with a permuted rule priority)."""
    ring = ring or e.ring
    if ring is not e.ring:
        raise RingError("expression belongs to a different ring")
    return Expr(ring, ring.normalize_terms(e.terms, rule_order), normalize=False)


def arith(e1: Expr, e2: Expr | Scalar, op: str) -> Expr:
    if op == "add":
        return e1 + e2
    if op == "mul":
        return e1 * e2
    if op == "scale":
        if not isinstance(e2, (int, Fraction)):
            raise RingError("scale expects a rational factor")
        return e1 * e2
    raise RingError(f"unknown op {op!r}")


class _ExprParser:
    """Whitelisted walk over Python's expression AST (``^`` means power)."""

    def __init__(self, ring: Ring):
        self.ring = ring

    def parse(self, text: str) -> Terms:
        if not isinstance(text, str):
            raise RingError(f"expression must be a string, got {type(text).__name__}")
        src = text.strip().replace("^", "**")
        if not src:
            raise RingError("empty expression")
        try:
            tree = ast.parse(src, mode="eval")
        except SyntaxError as exc:
            raise RingError(f"cannot parse expression {text!r}: {exc.msg}") from None
        return self._eval(tree.body, text)

    def _const(self, terms: Terms) -> Fraction | None:
        if not terms:
            return Fraction(0)
        if len(terms) == 1:
            ((m, c),) = terms.items()
            if not any(m):
                return c
        return None

    def _mul(self, a: Terms, b: Terms) -> Terms:
        acc: Terms = {}
        for m1, c1 in a.items():
            for m2, c2 in b.items():
                _add_term(acc, _mono_mul(m1, m2), c1 * c2)
        return acc

    def _eval(self, node: ast.AST, text: str) -> Terms:
        ring = self.ring
        n = ring.nvars
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, int):
                raise RingError(f"only integer literals are allowed in {text!r}")
            return {(0,) * n: Fraction(node.value)} if node.value else {}
        if isinstance(node, ast.Name):
            if node.id not in ring.index:
                raise RingError(f"unknown generator {node.id!r} in {text!r}")
            i = ring.index[node.id]
            return {tuple(1 if j == i else 0 for j in range(n)): Fraction(1)}
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            inner = self._eval(node.operand, text)
            return {m: -c for m, c in inner.items()} if isinstance(node.op, ast.USub) else inner
        if isinstance(node, ast.BinOp):
            left = self._eval(node.left, text)
            if isinstance(node.op, ast.Pow):
                exponent = self._const(self._eval(node.right, text))
                if exponent is None or exponent.denominator != 1:
                    raise RingError(f"exponents must be integer constants in {text!r}")
                k = int(exponent)
                if k < 0:
                    if len(left) != 1:
                        raise RingError(f"cannot invert a sum in {text!r}")
                    ((m, c),) = left.items()
                    if any(e and g not in ring.laurent for e, g in zip(m, ring.generators)):
                        raise RingError(f"negative power of a non-laurent term in {text!r}")
                    return {tuple(-e * (-k) for e in m): 1 / c ** (-k)}
                result: Terms = {(0,) * n: Fraction(1)}
                for _ in range(k):
                    result = self._mul(result, left)
                return result
            right = self._eval(node.right, text)
            if isinstance(node.op, ast.Add):
                acc = dict(left)
                for m, c in right.items():
                    _add_term(acc, m, c)
                return acc
            if isinstance(node.op, ast.Sub):
                acc = dict(left)
                for m, c in right.items():
                    _add_term(acc, m, -c)
                return acc
            if isinstance(node.op, ast.Mult):
                return self._mul(left, right)
            if isinstance(node.op, ast.Div):
                divisor = self._const(right)
                if divisor is None or divisor == 0:
                    raise RingError(f"division only by nonzero rational constants in {text!r}")
                return {m: c / divisor for m, c in left.items()}
        raise RingError(f"unsupported syntax in expression {text!r}")
