"""Loading and validating JSON geometry specs.

Every failure is a :class:`SpecError` carrying the name of the violated
invariant and a location inside the document.
"""

from __future__ import annotations

import copy
import json
from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any

from .action import ActionSpec, form_action_from_blocks
from .calculus import Frame, OneForm, VectorField
from .liebialg import LieBialgebra, XiData, lie_bialgebra_from_blocks, xi_from_block
from .poisson import ContravariantConnection, PoissonStructure
from .symkernel import Expr, Ring, RingError

BUNDLED = ("su2_selfaction", "s1_group", "su2_hopf")


class SpecError(ValueError):
    def __init__(self, invariant: str, location: str, detail: str):
        self.invariant = invariant
        self.location = location
        self.detail = detail
        super().__init__(f"[{invariant}] at {location}: {detail}")


@dataclass
class FibreData:
    L: LieBialgebra
    xi: XiData | None
    frame_dual: dict[str, str] | None
    bicovariant: bool = True


@dataclass
class BundleData:
    base_generators: dict[str, Expr]
    base_generator_strings: dict[str, str]
    base_relations: list[tuple[str, str]]
    base_denominators: list[str]
    degree_bound: int = 6
    symmetry: dict[str, Any] | None = None
    symmetry_L: LieBialgebra | None = None
    symmetry_fields: dict[str, VectorField] | None = None


@dataclass
class SpinData:
    omega: dict[str, OneForm]
    alpha: dict[str, OneForm]


@dataclass
class GeometrySpec:
    name: str
    raw: dict
    ring: Ring
    frame: Frame
    poisson: PoissonStructure
    connection: ContravariantConnection
    fibre: FibreData | None = None
    action: ActionSpec | None = None
    bundle: BundleData | None = None
    spin: SpinData | None = None
    extras: dict[str, Any] = field(default_factory=dict)

    @property
    def generators(self) -> tuple[str, ...]:
        return self.ring.visible


def _req(block: Mapping, key: str, where: str):
    if not isinstance(block, Mapping) or key not in block:
        raise SpecError("schema", where, f"missing required key {key!r}")
    return block[key]


def _wrap(invariant: str, where: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except SpecError:
        raise
    except RingError as exc:
        raise SpecError(invariant, where, str(exc)) from None


def _problems(invariant: str, where: str, problems: list[str]) -> None:
    if problems:
        raise SpecError(invariant, where, problems[0])


def bundled_path(name: str) -> Path:
    stem = name[:-5] if name.endswith(".json") else name
    return Path(str(resources.files("plgb") / "data" / f"{stem}.json"))


def resolve_path(path: str | Path) -> Path:
    p = Path(path)
    if p.exists():
        return p
    stem = p.name[:-5] if p.name.endswith(".json") else p.name
    if stem in BUNDLED:
        return bundled_path(stem)
    raise SpecError("file", str(path), "no such file")


def load_spec(path: str | Path) -> GeometrySpec:
    p = resolve_path(path)
    try:
        raw = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise SpecError("parse", f"{p}:{exc.lineno}:{exc.colno}", exc.msg) from None
    return build_spec(raw, name=p.name)


def build_spec(raw: Mapping[str, Any], name: str = "<memory>") -> GeometrySpec:
    if not isinstance(raw, Mapping):
        raise SpecError("schema", "/", "top level must be an object")
    raw = copy.deepcopy(dict(raw))
    for key in ("ring", "frame", "poisson", "connection"):
        _req(raw, key, "/")

    # ring
    rb = raw["ring"]
    gens = _req(rb, "generators", "/ring")
    relations = []
    for k, rel in enumerate(rb.get("relations", [])):
        relations.append((_req(rel, "lhs", f"/ring/relations/{k}"), _req(rel, "rhs", f"/ring/relations/{k}")))
    ring = _wrap(
        "ring",
        "/ring",
        Ring,
        gens,
        laurent=rb.get("laurent", []),
        relations=relations,
        denominators=rb.get("denominators", []),
        identity_point={g: Fraction(v) for g, v in rb.get("identity_point", {}).items()},
    )

    # frame
    fb = raw["frame"]
    names = _req(fb, "names", "/frame")
    in_diff = fb.get("in_differentials")
    if in_diff is not None:
        in_diff = {n: [(c, g) for g, c in terms.items()] for n, terms in in_diff.items()}
    d2 = fb.get("d2")
    if d2 is not None:
        d2 = {n: {tuple(p.strip() for p in key.split(",")): v for key, v in entries.items()} for n, entries in d2.items()}
    frame = _wrap(
        "frame",
        "/frame",
        Frame,
        ring,
        names,
        _req(fb, "differential", "/frame"),
        in_differentials=in_diff,
        d2=d2,
        relations=fb.get("relations", []),
    )
    _problems("d annihilates ring relations", "/frame/differential", frame.check_relations())
    _problems("frame round trip", "/frame/in_differentials", frame.check_round_trip())
    _problems("structure equations", "/frame/d2", _wrap("structure equations", "/frame/d2", frame.check_d2))

    # poisson
    P = _wrap("Poisson antisymmetry", "/poisson", PoissonStructure, ring, raw["poisson"])
    _problems("bracket annihilates ring relations", "/poisson", P.check())

    # connection
    table = {}
    for key, val in raw["connection"].items():
        parts = key.split("|")
        if len(parts) != 2:
            raise SpecError("schema", f"/connection/{key}", "keys must look like 'gen|frame'")
        table[(parts[0].strip(), parts[1].strip())] = val
    C = _wrap("connection", "/connection", ContravariantConnection, P, frame, table)
    _problems("connection well defined on the quotient", "/connection", C.check())

    spec = GeometrySpec(name=name, raw=raw, ring=ring, frame=frame, poisson=P, connection=C)

    if "fibre" in raw:
        spec.fibre = _load_fibre(raw["fibre"], frame)
    if "action" in raw:
        if spec.fibre is None:
            raise SpecError("cross reference", "/action", "an action block needs a fibre block")
        spec.action = _load_action(raw["action"], spec.fibre, frame, "/action")
    if "bundle" in raw:
        if spec.action is None:
            raise SpecError("cross reference", "/bundle", "a bundle block needs an action block")
        spec.bundle = _load_bundle(raw["bundle"], spec)
    if "spin_connection" in raw:
        if spec.action is None:
            raise SpecError("cross reference", "/spin_connection", "a spin connection needs an action block")
        spec.spin = _load_spin(raw["spin_connection"], spec)
    return spec


def _load_fibre(fb: Mapping, frame: Frame) -> FibreData:
    where = "/fibre"
    basis = _req(fb, "basis", where)
    L = _wrap("fibre", where, lie_bialgebra_from_blocks, basis, fb.get("brackets", {}), fb.get("cobracket", {}))
    _problems("fibre antisymmetry", where, L.check_shapes())
    xi = _wrap("fibre", f"{where}/xi_star", xi_from_block, basis, fb["xi_star"]) if "xi_star" in fb else None
    frame_dual = fb.get("frame_dual")
    if frame_dual is not None:
        if sorted(frame_dual) != sorted(frame.names) or sorted(frame_dual.values()) != sorted(basis):
            raise SpecError("cross reference", f"{where}/frame_dual", "must pair every frame element with a distinct basis element")
    return FibreData(L, xi, frame_dual, bool(fb.get("bicovariant", True)))


def _load_fields(block: Mapping, frame: Frame, where: str) -> dict[str, VectorField]:
    out = {}
    for b, values in block.items():
        out[b] = _wrap("action fields", f"{where}/{b}", VectorField, frame, values)
    return out


def _load_action(ab: Mapping, fibre: FibreData, frame: Frame, where: str) -> ActionSpec:
    chirality = _req(ab, "chirality", where)
    fields_block = _req(ab, "fields", where)
    for b in fields_block:
        if b not in fibre.L.basis:
            raise SpecError("cross reference", f"{where}/fields/{b}", "unknown fibre basis element")
    fields = _load_fields(fields_block, frame, f"{where}/fields")
    form_action = None
    if "form_action" in ab:
        form_action = _wrap("form action", f"{where}/form_action", form_action_from_blocks, frame, ab["form_action"])
    left_inv = {}
    if fibre.frame_dual is not None:
        duals = frame.dual_fields()
        left_inv = {b: duals[e] for e, b in fibre.frame_dual.items()}
    A = _wrap(
        "action",
        where,
        ActionSpec,
        chirality,
        fibre.L,
        frame,
        fields,
        form_action,
        ab.get("delta_fields", "action"),
        left_inv,
    )
    _problems("action consistency", where, A.check())
    return A


def _load_bundle(bb: Mapping, spec: GeometrySpec) -> BundleData:
    where = "/bundle"
    ring = spec.ring
    gens_block = _req(bb, "base_generators", where)
    base = {}
    for name, text in gens_block.items():
        base[name] = _wrap("bundle", f"{where}/base_generators/{name}", ring.parse, text)
        for b, f in spec.action.fields.items():
            val = f(base[name])
            if not val.is_zero():
                raise SpecError("base generator invariance", f"{where}/base_generators/{name}", f"field {b} gives {val}")
    relations = [(_req(r, "lhs", f"{where}/base_relations/{k}"), _req(r, "rhs", f"{where}/base_relations/{k}")) for k, r in enumerate(bb.get("base_relations", []))]
    # relations must hold upstairs after substitution
    names = list(base)
    try:
        scratch = Ring(names)
    except RingError as exc:
        raise SpecError("bundle", f"{where}/base_generators", str(exc)) from None
    for k, (lhs, rhs) in enumerate(relations):
        rel = _wrap("bundle", f"{where}/base_relations/{k}", scratch.parse, f"({lhs}) - ({rhs})")
        up = substitute(rel, base, ring)
        if not up.is_zero():
            raise SpecError("base relation holds upstairs", f"{where}/base_relations/{k}", f"residual {up}")
    data = BundleData(
        base_generators=base,
        base_generator_strings=dict(gens_block),
        base_relations=relations,
        base_denominators=list(bb.get("base_denominators", [])),
        degree_bound=int(bb.get("degree_bound", 6)),
    )
    if "symmetry" in bb:
        sb = bb["symmetry"]
        sw = f"{where}/symmetry"
        L = _wrap("symmetry", sw, lie_bialgebra_from_blocks, _req(sb, "basis", sw), sb.get("brackets", {}), sb.get("cobracket", {}))
        fields = _load_fields(_req(sb, "fields", sw), spec.frame, f"{sw}/fields")
        sym = ActionSpec(_req(sb, "chirality", sw), L, spec.frame, fields)
        _problems("symmetry consistency", sw, sym.check())
        data.symmetry = dict(sb)
        data.symmetry_L = L
        data.symmetry_fields = fields
    return data


def substitute(e: Expr, values: Mapping[str, Expr], target: Ring) -> Expr:
    """Replace each generator of e's ring by an expression of ``target``."""
    src = e.ring
    gens = [values[g] for g in src.generators]
    total = target.zero()
    for mono, coeff in e.terms.items():
        term = target.const(coeff)
        for g, k in zip(gens, mono):
            if k:
                term = term * (g ** k)
        total = total + term
    return total


def _load_spin(sb: Mapping, spec: GeometrySpec) -> SpinData:
    where = "/spin_connection"
    frame = spec.frame
    basis = spec.fibre.L.basis
    omega_block = _req(sb, "omega", where)
    alpha_block = sb.get("alpha", {})
    for block, key in ((omega_block, "omega"), (alpha_block, "alpha")):
        for b in block:
            if b not in basis:
                raise SpecError("cross reference", f"{where}/{key}/{b}", "unknown fibre basis element")
    omega = {b: _wrap("spin connection", f"{where}/omega/{b}", frame.form, omega_block.get(b, {})) for b in basis}
    alpha = {b: _wrap("spin connection", f"{where}/alpha/{b}", frame.form, alpha_block.get(b, {})) for b in basis}
    return SpinData(omega, alpha)


def dump_json(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"
