"""Finite-dimensional Lie bialgebras and the tensor conditions on Xi.

Conventions: ``c[i, j, k]`` gives ``[e_i, e_j] = sum_k c[i, j, k] e_k``;
``d[i, j, k]`` gives ``delta(e_i) = sum d[i, j, k] e_j (x) e_k``; and
``X[i, j, k]`` gives ``Xi(f^i, f^j) = sum_k X[i, j, k] f^k`` on the dual basis,
equivalently ``Xi*(e_k) = sum X[i, j, k] e_i (x) e_j``.  The dual bracket is
``[f^a, f^b] = sum_k d[k, a, b] f^k``.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from .symkernel import Ring, RingError


class LieError(RingError):
    """Raised for malformed Lie bialgebra or Xi data."""


def zeros(*shape: int) -> np.ndarray:
    out = np.empty(shape, dtype=object)
    out.fill(Fraction(0))
    return out


def first_nonzero(tensor: np.ndarray) -> tuple[tuple[int, ...], Fraction] | None:
    for idx in np.ndindex(tensor.shape):
        if tensor[idx] != 0:
            return idx, tensor[idx]
    return None


def is_zero(tensor: np.ndarray) -> bool:
    return first_nonzero(tensor) is None


@dataclass(frozen=True)
class LieBialgebra:
    basis: tuple[str, ...]
    c: np.ndarray
    d: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.basis)

    def index(self, name: str) -> int:
        try:
            return self.basis.index(name)
        except ValueError:
            raise LieError(f"unknown basis element {name!r}") from None

    def check_shapes(self) -> list[str]:
        n = self.dim
        problems = []
        for i, j, k in product(range(n), repeat=3):
            if self.c[i, j, k] != -self.c[j, i, k]:
                problems.append(f"structure constants not antisymmetric at ({self.basis[i]},{self.basis[j]})")
                break
        for i, j, k in product(range(n), repeat=3):
            if self.d[i, j, k] != -self.d[i, k, j]:
                problems.append(f"cobracket of {self.basis[i]} is not antisymmetric")
                break
        return problems

    def bracket_vec(self, i: int, j: int) -> np.ndarray:
        return self.c[i, j, :]

    def cobracket_terms(self, i: int) -> list[tuple[Fraction, int, int]]:
        n = self.dim
        return [(self.d[i, j, k], j, k) for j in range(n) for k in range(n) if self.d[i, j, k] != 0]


@dataclass(frozen=True)
class XiData:
    X: np.ndarray

    def star_terms(self, k: int) -> list[tuple[Fraction, int, int]]:
        n = self.X.shape[0]
        return [(self.X[i, j, k], i, j) for i in range(n) for j in range(n) if self.X[i, j, k] != 0]


def _lie_parse_vector(ring: Ring, text: str, basis: Sequence[str], where: str) -> np.ndarray:
    e = ring.parse(text)
    out = zeros(len(basis))
    for mono, coeff in e.terms.items():
        if sum(mono) != 1 or any(k < 0 for k in mono):
            raise LieError(f"{where}: {text!r} is not a linear combination of basis elements")
        out[mono.index(1)] = Fraction(coeff)
    return out


def lie_bialgebra_from_blocks(
    basis: Sequence[str],
    brackets: Mapping[str, str],
    cobracket: Mapping[str, Mapping[str, str | int]],
) -> LieBialgebra:
    basis = tuple(basis)
    if len(set(basis)) != len(basis):
        raise LieError(f"duplicate basis names {list(basis)}")
    n = len(basis)
    ring = Ring(basis)
    c = zeros(n, n, n)
    for key, val in brackets.items():
        i, j = _pair(key, basis, "brackets")
        vec = _lie_parse_vector(ring, val, basis, f"bracket {key}")
        if i == j:
            if not is_zero(vec):
                raise LieError(f"bracket [{basis[i]},{basis[i]}] must vanish")
            continue
        c[i, j, :] = vec
        c[j, i, :] = -vec
    d = zeros(n, n, n)
    for name, comps in cobracket.items():
        if name not in basis:
            raise LieError(f"cobracket names unknown basis element {name!r}")
        i = basis.index(name)
        for key, val in comps.items():
            j, k = _pair(key, basis, f"cobracket of {name}")
            d[i, j, k] += Fraction(val) if not isinstance(val, str) else ring.parse(val).constant_value()
    return LieBialgebra(basis, c, d)


def xi_from_block(basis: Sequence[str], xi_star: Mapping[str, Mapping[str, str | int]]) -> XiData:
    basis = tuple(basis)
    n = len(basis)
    ring = Ring(basis)
    X = zeros(n, n, n)
    for name, comps in xi_star.items():
        if name not in basis:
            raise LieError(f"xi_star names unknown basis element {name!r}")
        k = basis.index(name)
        for key, val in comps.items():
            i, j = _pair(key, basis, f"xi_star of {name}")
            X[i, j, k] += Fraction(val) if not isinstance(val, str) else ring.parse(val).constant_value()
    return XiData(X)


def xi_to_block(L: LieBialgebra, xi: XiData) -> dict[str, dict[str, str]]:
    out: dict[str, dict[str, str]] = {}
    for k, name in enumerate(L.basis):
        comps = {f"{L.basis[i]},{L.basis[j]}": str(coeff) for coeff, i, j in xi.star_terms(k)}
        if comps:
            out[name] = comps
    return out


def _pair(key: str, basis: Sequence[str], where: str) -> tuple[int, int]:
    parts = [p.strip() for p in key.split(",")]
    if len(parts) != 2 or any(p not in basis for p in parts):
        raise LieError(f"{where}: key {key!r} must name two basis elements")
    return basis.index(parts[0]), basis.index(parts[1])


def _jacobi(c: np.ndarray) -> np.ndarray:
    """[e_i,[e_j,e_k]] + [e_j,[e_k,e_i]] + [e_k,[e_i,e_j]] componentwise."""
    n = c.shape[0]
    J = zeros(n, n, n, n)
    for i, j, k, m in product(range(n), repeat=4):
        total = Fraction(0)
        for l in range(n):
            total += c[j, k, l] * c[i, l, m] + c[k, i, l] * c[j, l, m] + c[i, j, l] * c[k, l, m]
        J[i, j, k, m] = total
    return J


def dual_structure(L: LieBialgebra) -> np.ndarray:
    """Structure constants of g*: D[a, b, k] with [f^a, f^b] = sum_k D[a, b, k] f^k."""
    return np.transpose(L.d, (1, 2, 0)).copy()


def check_lie(L: LieBialgebra) -> np.ndarray:
    return _jacobi(L.c)


def check_cobracket(L: LieBialgebra) -> tuple[np.ndarray, np.ndarray]:
    """(co-Jacobi defect, 1-cocycle defect)."""
    n = L.dim
    cojac = _jacobi(dual_structure(L))
    # delta([e_i,e_j]) - ad_{e_i} delta(e_j) + ad_{e_j} delta(e_i)
    cocycle = zeros(n, n, n, n)
    for i, j in product(range(n), repeat=2):
        T = zeros(n, n)
        for l in range(n):
            if L.c[i, j, l] != 0:
                T += L.c[i, j, l] * L.d[l]
        for sign, x, y in ((-1, i, j), (1, j, i)):
            dy = L.d[y]
            for p, q in product(range(n), repeat=2):
                if dy[p, q] == 0:
                    continue
                coeff = sign * dy[p, q]
                for r in range(n):
                    T[r, q] += coeff * L.c[x, p, r]
                    T[p, r] += coeff * L.c[x, q, r]
        cocycle[i, j] = T
    return cojac, cocycle


def check_xi_compat(L: LieBialgebra, xi: XiData) -> np.ndarray:
    """Xi(phi,psi) - Xi(psi,phi) - [phi,psi]_{g*} on basis pairs."""
    X = xi.X
    return X - np.transpose(X, (1, 0, 2)) - dual_structure(L)


def check_bicovariant(L: LieBialgebra, xi: XiData) -> np.ndarray:
    """Dual-form bicovariance defect, indexed [eta, xi, p, q] on e_p (x) e_q."""
    n = L.dim
    c, d, X = L.c, L.d, xi.X
    out = zeros(n, n, n, n)
    for a, b in product(range(n), repeat=2):
        T = zeros(n, n)
        for p, q in product(range(n), repeat=2):
            total = Fraction(0)
            for l in range(n):
                total += c[a, b, l] * X[p, q, l]
                total -= X[l, q, a] * c[l, b, p]
                total -= X[p, l, a] * c[l, b, q]
                total -= d[b, p, l] * c[a, l, q]
            T[p, q] = total
        out[a, b] = T
    return out


def check_prelie(L: LieBialgebra, xi: XiData) -> np.ndarray:
    """Antisymmetrized associator of Xi, indexed [i, j, k, m]."""
    X = xi.X
    n = X.shape[0]
    A = zeros(n, n, n, n)
    for i, j, k, m in product(range(n), repeat=4):
        total = Fraction(0)
        for l in range(n):
            total += X[j, k, l] * X[i, l, m] - X[i, j, l] * X[l, k, m]
        A[i, j, k, m] = total
    return A - np.transpose(A, (1, 0, 2, 3))


def format_tensor_entry(L: LieBialgebra, idx: tuple[int, ...], value: Fraction) -> str:
    names = ",".join(L.basis[i] for i in idx)
    return f"[{names}] = {value}"


def xi_from_connection(
    C,
    L: LieBialgebra,
    frame_dual: Mapping[str, str],
) -> XiData:
    """Read the constant Xi off a connection on a left-invariant frame.

    ``frame_dual`` maps each frame name to the basis element whose dual it is.
    The connection along one frame element applied to another must have
    constant coefficients (translation invariance); the identity point of the
    ring is required and the values are re-evaluated there as a cross-check.
    """
    frame = C.frame
    ring = frame.ring
    if not ring.identity_point:
        raise LieError("group ring has no identity_point")
    if frame.in_differentials is None:
        raise LieError("frame is not a left-invariant frame (no in_differentials)")
    if sorted(frame_dual) != sorted(frame.names) or sorted(frame_dual.values()) != sorted(L.basis):
        raise LieError("frame_dual must pair every frame element with a distinct basis element")
    n = L.dim
    X = zeros(n, n, n)
    for ei in frame.names:
        for ej in frame.names:
            out = C.apply(frame.element(ei), frame.element(ej))
            for ek, coeff in zip(frame.names, out.coords):
                if not coeff.is_constant():
                    raise LieError(
                        f"connection along {ei} on {ej} has non-constant {ek} coefficient {coeff}; "
                        "Xi depends on the group point"
                    )
                at_identity = ring.evaluate(coeff, ring.identity_point)
                if at_identity != coeff.constant_value():
                    raise LieError(f"identity evaluation of {coeff} disagrees")
                i, j, k = (L.index(frame_dual[e]) for e in (ei, ej, ek))
                X[i, j, k] = at_identity
    return XiData(X)


def resynthesize_connection(C, L: LieBialgebra, xi: XiData, frame_dual: Mapping[str, str]) -> list[str]:
    """Rebuild the connection table from Xi and compare entrywise."""
    frame = C.frame
    ring = frame.ring
    problems = []
    for g in ring.visible:
        dg = frame.d_table[ring.index[g]]
        for ej in frame.names:
            rebuilt = frame.zero()
            for ei, coeff in zip(frame.names, dg.coords):
                if not coeff:
                    continue
                i, j = L.index(frame_dual[ei]), L.index(frame_dual[ej])
                for ek in frame.names:
                    val = xi.X[i, j, L.index(frame_dual[ek])]
                    if val:
                        rebuilt = rebuilt + frame.element(ek) * (coeff * val)
            original = C.apply(dg, frame.element(ej))
            if rebuilt != original:
                problems.append(f"entry (d{g}, {ej}): table gives {original}, Xi gives {rebuilt}")
    return problems
