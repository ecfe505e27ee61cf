"""Check orchestration: spanning sets, seeded random instances and reports.

Each check runs over a fixed spanning set plus a few seeded random instances
and records the first nonzero defect.  Checks are independent and run
concurrently; only report assembly is ordered.
"""

from __future__ import annotations

import json
import random
import time
import zlib
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations, product

import numpy as np

from . import liebialg as lb
from .action import conn_covariance_defect, cor44_check, plg_action_defect
from .bundle import cor52_check, induce_base, transversality_defect
from .calculus import OneForm
from .poisson import compatibility_defect, curvature, jacobiator
from .spec import GeometrySpec
from .spinconn import gamma, leibniz_gap_check, validate_spin_connection, varsigma_cross_check
from .symkernel import Expr, RingError

CHECK_NAMES = (
    "jacobi",
    "compat",
    "curvature",
    "plg",
    "covariance",
    "bicovariance",
    "prelie",
    "cocycle",
    "xi_compat",
    "xi_extract",
    "transversality",
    "cor44",
    "cor52",
    "induce_base",
    "spin",
    "gamma",
    "leibniz_gap",
)
RANDOM_INSTANCES = 6


class UsageError(ValueError):
    """Bad check selection or a check whose required block is missing."""


@dataclass
class CheckResult:
    id: str
    inputs: dict
    defect: str
    status: str
    ms: float | None = None
    failures: int = 0


@dataclass
class CheckReport:
    spec: str
    seed: int
    degree_bound: int
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> int:
        return sum(c.status == "pass" for c in self.checks)

    @property
    def failed(self) -> int:
        return len(self.checks) - self.passed

    def to_dict(self, timings: bool = False) -> dict:
        return {
            "spec": self.spec,
            "seed": self.seed,
            "degree_bound": self.degree_bound,
            "checks": [
                {
                    "id": c.id,
                    "inputs": c.inputs,
                    "defect": c.defect,
                    "status": c.status,
                    "ms": round(c.ms, 3) if timings and c.ms is not None else None,
                }
                for c in self.checks
            ],
            "summary": {"passed": self.passed, "failed": self.failed},
        }


def emit_report(report: CheckReport, fmt: str = "text", timings: bool = False) -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(timings), indent=2) + "\n"
    if fmt != "text":
        raise UsageError(f"unknown format {fmt!r}")
    lines = [f"spec {report.spec}  seed {report.seed}  degree_bound {report.degree_bound}"]
    for c in report.checks:
        n = c.inputs.get("spanning", 0) + c.inputs.get("random", 0)
        timing = f" ({c.ms:.1f} ms)" if timings and c.ms is not None else ""
        if c.status == "pass":
            lines.append(f"{c.id:<15} {n:>5} instances{timing}  PASS")
        else:
            lines.append(f"{c.id:<15} {n:>5} instances{timing}  FAIL  {c.failures} nonzero, first {c.defect}")
    lines.append(f"{report.passed}/{len(report.checks)} checks passed")
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------
# instances


def _is_zero(value) -> bool:
    if isinstance(value, np.ndarray):
        return lb.is_zero(value)
    if isinstance(value, (Expr, OneForm)):
        return value.is_zero()
    return value == 0


class _Collector:
    def __init__(self):
        self.spanning = 0
        self.random = 0
        self.failures = 0
        self.first: str | None = None

    def add(self, label: str, value, randomized: bool = False) -> None:
        if randomized:
            self.random += 1
        else:
            self.spanning += 1
        if not _is_zero(value):
            self.failures += 1
            if self.first is None:
                self.first = f"[{label}] {value}"

    def fail(self, label: str, message: str) -> None:
        self.spanning += 1
        self.failures += 1
        if self.first is None:
            self.first = f"[{label}] error: {message}"

    def tensor(self, label: str, T: np.ndarray, names: Sequence[str]) -> None:
        hit = lb.first_nonzero(T)
        self.spanning += int(np.prod(T.shape))
        if hit is not None:
            self.failures += sum(1 for idx in np.ndindex(T.shape) if T[idx] != 0)
            if self.first is None:
                idx, val = hit
                self.first = f"[{label} " + ",".join(names[i] for i in idx) + f"] {val}"


class RandomSource:
    """Seeded random polynomials and 1-forms for property instances."""

    def __init__(self, spec: GeometrySpec, seed: int, check_id: str, degree_bound: int):
        self.rng = random.Random(seed + zlib.crc32(check_id.encode()))
        self.spec = spec
        self.bound = degree_bound

    def poly(self, ring=None) -> Expr:
        ring = ring or self.spec.ring
        n = len(ring.visible)
        pad = (0,) * (ring.nvars - n)
        out = ring.zero()
        for _ in range(self.rng.randint(1, 3)):
            deg = self.rng.randint(0, self.bound)
            mono = [0] * n
            for _ in range(deg):
                mono[self.rng.randrange(n)] += 1
            for i, g in enumerate(ring.visible):
                if g in ring.laurent and self.rng.random() < 0.5:
                    mono[i] = -mono[i]
            coeff = self.rng.choice([-3, -2, -1, 1, 2, 3])
            out = out + ring.monomial(tuple(mono) + pad, coeff)
        return out

    def form(self, frame=None) -> OneForm:
        frame = frame or self.spec.frame
        coords = {}
        for name in frame.names:
            if self.rng.random() < 0.7:
                coords[name] = self.poly(frame.ring)
        return frame.form(coords)


def _gens(ring) -> list[tuple[str, Expr]]:
    return [(g, ring.gen(g)) for g in ring.visible]


def _dgens(spec: GeometrySpec) -> list[tuple[str, OneForm]]:
    return [(f"d{g}", spec.frame.differential(e)) for g, e in _gens(spec.ring)]


def _frame_elems(spec: GeometrySpec) -> list[tuple[str, OneForm]]:
    return [(n, spec.frame.element(n)) for n in spec.frame.names]


# ----------------------------------------------------------------------
# checks; each returns None after filling the collector


def _check_jacobi(spec, col, rnd):
    P = spec.poisson
    gens = _gens(spec.ring)
    for (a, p), (b, q), (c, r) in combinations(gens, 3):
        col.add(f"{a},{b},{c}", jacobiator(P, p, q, r))
    for _ in range(RANDOM_INSTANCES):
        p, q, r = rnd.poly(), rnd.poly(), rnd.poly()
        col.add(f"random {p} | {q} | {r}", jacobiator(P, p, q, r), True)


def _check_compat(spec, col, rnd):
    C, P = spec.connection, spec.poisson
    for (a, eta), (b, tau) in product(_dgens(spec), _frame_elems(spec)):
        col.add(f"{a},{b}", compatibility_defect(C, P, eta, tau))
    for _ in range(RANDOM_INSTANCES):
        eta, tau = rnd.form(), rnd.form()
        col.add(f"random {eta} | {tau}", compatibility_defect(C, P, eta, tau), True)


def _check_curvature(spec, col, rnd):
    C, P = spec.connection, spec.poisson
    d = _dgens(spec)
    for (a, eta), (b, tau), (c, sig) in product(d, d, _frame_elems(spec)):
        if a < b:
            col.add(f"{a},{b},{c}", curvature(C, P, eta, tau, sig))
    for _ in range(max(2, RANDOM_INSTANCES // 2)):
        eta, tau, sig = rnd.form(), rnd.form(), rnd.form()
        col.add(f"random {eta} | {tau} | {sig}", curvature(C, P, eta, tau, sig), True)


def _check_plg(spec, col, rnd):
    A, P = spec.action, spec.poisson
    gens = _gens(spec.ring)
    for xi in spec.fibre.L.basis:
        for (a, p), (b, q) in product(gens, gens):
            col.add(f"{xi}; {a},{b}", plg_action_defect(A, P, xi, p, q))
        for _ in range(RANDOM_INSTANCES):
            p, q = rnd.poly(), rnd.poly()
            col.add(f"{xi}; random {p} | {q}", plg_action_defect(A, P, xi, p, q), True)


def _form_pairs(spec):
    d, e = _dgens(spec), _frame_elems(spec)
    return list(product(d, e)) + list(product(e, d)) + list(product(d, d))


def _check_covariance(spec, col, rnd):
    A, P, C = spec.action, spec.poisson, spec.connection
    for xi in spec.fibre.L.basis:
        for (a, eta), (b, tau) in _form_pairs(spec):
            col.add(f"{xi}; {a},{b}", conn_covariance_defect(A, P, C, xi, eta, tau))
        for _ in range(RANDOM_INSTANCES // 2):
            eta, tau = rnd.form(), rnd.form()
            col.add(f"{xi}; random {eta} | {tau}", conn_covariance_defect(A, P, C, xi, eta, tau), True)


def _check_cor44(spec, col, rnd):
    A, P, C = spec.action, spec.poisson, spec.connection
    for xi in spec.fibre.L.basis:
        for (a, tau), (b, eta) in _form_pairs(spec):
            col.add(f"{xi}; {a},{b}", cor44_check(A, P, C, xi, tau, eta))
        for _ in range(RANDOM_INSTANCES // 2):
            tau, eta = rnd.form(), rnd.form()
            col.add(f"{xi}; random {tau} | {eta}", cor44_check(A, P, C, xi, tau, eta), True)


def _check_bicovariance(spec, col, rnd):
    L = spec.fibre.L
    col.tensor("eta,xi,p,q", lb.check_bicovariant(L, spec.fibre.xi), L.basis)


def _check_prelie(spec, col, rnd):
    L = spec.fibre.L
    col.tensor("i,j,k,m", lb.check_prelie(L, spec.fibre.xi), L.basis)


def _check_cocycle(spec, col, rnd):
    L = spec.fibre.L
    col.tensor("jacobi", lb.check_lie(L), L.basis)
    cojac, cocycle = lb.check_cobracket(L)
    col.tensor("co-jacobi", cojac, L.basis)
    col.tensor("cocycle", cocycle, L.basis)


def _check_xi_compat(spec, col, rnd):
    L = spec.fibre.L
    col.tensor("i,j,k", lb.check_xi_compat(L, spec.fibre.xi), L.basis)


def _check_xi_extract(spec, col, rnd):
    L, fb = spec.fibre.L, spec.fibre
    try:
        xi = lb.xi_from_connection(spec.connection, L, fb.frame_dual)
    except RingError as exc:
        col.fail("extract", str(exc))
        return
    if fb.xi is not None:
        col.tensor("extracted - declared", xi.X - fb.xi.X, L.basis)
    for problem in lb.resynthesize_connection(spec.connection, L, xi, fb.frame_dual):
        col.fail("resynthesis", problem)
    col.spanning += 1


def _check_transversality(spec, col, rnd):
    for xi in spec.fibre.L.basis:
        for (a, eta), (b, tau) in _form_pairs(spec):
            col.add(f"{xi}; {a},{b}", transversality_defect(spec, xi, eta, tau))
        for _ in range(RANDOM_INSTANCES // 2):
            eta, tau = rnd.form(), rnd.form()
            col.add(f"{xi}; random {eta} | {tau}", transversality_defect(spec, xi, eta, tau), True)


def _check_cor52(spec, col, rnd):
    for xi in spec.fibre.L.basis:
        for (a, eta), (b, tau) in _form_pairs(spec) + list(product(_frame_elems(spec), repeat=2)):
            col.add(f"{xi}; {a},{b}", cor52_check(spec, xi, eta, tau))
        for _ in range(RANDOM_INSTANCES // 2):
            eta, tau = rnd.form(), rnd.form()
            col.add(f"{xi}; random {eta} | {tau}", cor52_check(spec, xi, eta, tau), True)


def _check_induce_base(spec, col, rnd):
    try:
        base = induce_base(spec)
    except RingError as exc:
        col.fail("induce", str(exc))
        return
    M = base.spec
    col.spanning += len(base.brackets) + len(base.connection)
    _check_jacobi(M, col, RandomSource(M, rnd.rng.randrange(2**31), "jacobi", rnd.bound))
    _check_compat(M, col, RandomSource(M, rnd.rng.randrange(2**31), "compat", rnd.bound))
    if M.action is not None:
        A, P, C = M.action, M.poisson, M.connection
        d = _dgens(M)
        for xi in A.fields:
            for (a, p), (b, q) in product(_gens(M.ring), repeat=2):
                col.add(f"base {xi}; {a},{b}", plg_action_defect(A, P, xi, p, q))
            for (a, eta), (b, tau) in product(d, d):
                col.add(f"base {xi}; {a},{b}", conn_covariance_defect(A, P, C, xi, eta, tau))


def _check_spin(spec, col, rnd):
    for kind, label, value in validate_spin_connection(spec):
        col.add(f"{kind} {label}", value)


def _monomial_corpus(spec, degree: int) -> list[tuple[str, Expr]]:
    ring = spec.ring
    out = []
    for deg in range(1, degree + 1):
        for combo in product(ring.visible, repeat=deg):
            if list(combo) != sorted(combo, key=ring.visible.index):
                continue
            p = ring.one()
            for g in combo:
                p = p * ring.gen(g)
            if p:
                out.append(("*".join(combo), p))
    return out


def _check_gamma(spec, col, rnd):
    A = spec.action
    corpus = _monomial_corpus(spec, min(rnd.bound, 3))
    randoms = [(f"random {p}", p) for p in (rnd.poly() for _ in range(RANDOM_INSTANCES))]
    for k, (label, p) in enumerate(corpus + randoms):
        randomized = k >= len(corpus)
        try:
            g = gamma(spec, p)
        except RingError as exc:
            col.fail(label, str(exc))
            continue
        for xi in spec.fibre.L.basis:
            col.add(f"{xi}; {label}", A.on_form(xi, g) - gamma(spec, A.on_function(xi, p)), randomized)


def _check_leibniz_gap(spec, col, rnd):
    base = [(a, e) for a, e in spec.bundle.base_generators.items()]
    gens = _gens(spec.ring)
    for (a, ae), (b, p) in product(base, gens):
        try:
            col.add(f"{a},{b}", leibniz_gap_check(spec, ae, p))
            col.add(f"varsigma {a},{b}", varsigma_cross_check(spec, ae, p))
        except RingError as exc:
            col.fail(f"{a},{b}", str(exc))
    for _ in range(RANDOM_INSTANCES // 2):
        a, ae = rnd.rng.choice(base)
        p = rnd.poly()
        col.add(f"random {a},{p}", leibniz_gap_check(spec, ae, p), True)


def _need(*blocks: str) -> Callable[[GeometrySpec], str | None]:
    def missing(spec: GeometrySpec) -> str | None:
        for b in blocks:
            if b == "xi" and (spec.fibre is None or spec.fibre.xi is None):
                return "fibre xi_star"
            if b == "frame_dual" and (spec.fibre is None or spec.fibre.frame_dual is None):
                return "fibre frame_dual"
            if b in ("fibre", "action", "bundle", "spin") and getattr(spec, b) is None:
                return b
            if b == "d2" and spec.frame.d2 is None and spec.frame.in_differentials is not None:
                return "frame d2"
        return None

    return missing


_CHECKS: dict[str, tuple[Callable, Callable]] = {
    "jacobi": (_check_jacobi, _need()),
    "compat": (_check_compat, _need()),
    "curvature": (_check_curvature, _need()),
    "plg": (_check_plg, _need("fibre", "action")),
    "covariance": (_check_covariance, _need("fibre", "action")),
    "bicovariance": (_check_bicovariance, _need("xi")),
    "prelie": (_check_prelie, _need("xi")),
    "cocycle": (_check_cocycle, _need("fibre")),
    "xi_compat": (_check_xi_compat, _need("xi")),
    "xi_extract": (_check_xi_extract, _need("frame_dual")),
    "transversality": (_check_transversality, _need("bundle", "xi")),
    "cor44": (_check_cor44, _need("fibre", "action", "d2")),
    "cor52": (_check_cor52, _need("bundle")),
    "induce_base": (_check_induce_base, _need("bundle")),
    "spin": (_check_spin, _need("spin")),
    "gamma": (_check_gamma, _need("spin", "xi")),
    "leibniz_gap": (_check_leibniz_gap, _need("spin", "bundle", "xi")),
}


def parse_selection(text: str | Iterable[str] | None) -> list[str] | None:
    """None means 'all'; otherwise the names in canonical order, validated."""
    if text is None:
        return None
    names = [t.strip() for t in text.split(",")] if isinstance(text, str) else list(text)
    names = [n for n in names if n]
    if names == ["all"] or not names:
        return None
    unknown = [n for n in names if n not in _CHECKS]
    if unknown:
        raise UsageError(f"unknown check name(s) {unknown}; choose from {', '.join(CHECK_NAMES)} or all")
    return [n for n in CHECK_NAMES if n in names]


def applicable_checks(spec: GeometrySpec) -> list[str]:
    out = []
    for name in CHECK_NAMES:
        if _CHECKS[name][1](spec) is not None:
            continue
        if name == "bicovariance" and not spec.fibre.bicovariant:
            continue
        out.append(name)
    return out


def _run_one(spec: GeometrySpec, name: str, degree_bound: int, seed: int) -> CheckResult:
    col = _Collector()
    rnd = RandomSource(spec, seed, name, degree_bound)
    start = time.perf_counter()
    try:
        _CHECKS[name][0](spec, col, rnd)
    except RingError as exc:
        col.fail(name, str(exc))
    ms = (time.perf_counter() - start) * 1000
    status = "pass" if col.failures == 0 else "fail"
    return CheckResult(
        id=name,
        inputs={"spanning": col.spanning, "random": col.random},
        defect="0" if col.first is None else col.first,
        status=status,
        ms=ms,
        failures=col.failures,
    )


def run_checks(
    spec: GeometrySpec,
    selection: str | Iterable[str] | None = None,
    degree_bound: int = 4,
    seed: int = 0,
    workers: int | None = None,
) -> CheckReport:
    names = parse_selection(selection)
    if names is None:
        names = applicable_checks(spec)
    else:
        for n in names:
            missing = _CHECKS[n][1](spec)
            if missing is not None:
                raise UsageError(f"check {n!r} needs the {missing} block, which {spec.name} lacks")
    report = CheckReport(spec.name, seed, degree_bound)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_run_one, spec, n, degree_bound, seed) for n in names]
        report.checks = [f.result() for f in futures]
    return report
