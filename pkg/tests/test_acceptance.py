"""Acceptance suite: seven criteria, one PASS/FAIL line each.

Every criterion records its clauses; the line for a criterion is PASS only if
all clauses hold.  The lines are printed by each test and again in the pytest
terminal summary.  Run ``python tests/test_acceptance.py`` for the lines alone.
"""

import json
from itertools import combinations, product

import pytest

from oracles import su2_reduce, to_sympy
from plgb import liebialg as lb
from plgb.action import conn_covariance_defect, plg_action_defect
from plgb.calculus import interior
from plgb.bundle import cor52_check, induce_base, is_horizontal, transversality_defect
from plgb.checks import RandomSource, emit_report, run_checks
from plgb.poisson import compatibility_defect, curvature, jacobiator, schouten
from plgb.spec import build_spec, load_spec, resolve_path
from plgb.spinconn import gamma, homogeneous_parts, leibniz_gap_check, symbolic_alpha, validate_spin_connection
from plgb.symkernel import Expr, normalize

TITLES = {
    1: "SU2 Poisson data: brackets, Jacobi, compatibility, flatness",
    2: "covariance suites: self-action, S1 action, worked H example",
    3: "Lie bialgebra and Xi suite",
    4: "transversality and its exact-form corollary on the Hopf bundle",
    5: "base induction onto the sphere",
    6: "spin connection, Gamma and the Leibniz gap",
    7: "seeded property suites at degree bound 4",
}
INSTANCES = 100
DEGREE_BOUND = 4
RESULTS: dict[int, list[tuple[str, bool]]] = {}


def _all_zero(values) -> bool:
    return all(v.is_zero() for v in values)


def _span(spec):
    gens = spec.ring.gens()
    d = [spec.frame.differential(g) for g in gens]
    e = [spec.frame.element(n) for n in spec.frame.names]
    return gens, d, e


def line(n: int) -> str:
    clauses = RESULTS.get(n)
    if clauses is None:
        return f"criterion {n}: {TITLES[n]} ... NOT RUN"
    failed = [c for c, ok in clauses if not ok]
    status = "FAIL" if failed else "PASS"
    tail = f"  (failing: {'; '.join(failed)})" if failed else ""
    return f"criterion {n}: {TITLES[n]} ... {status}{tail}"


def _report(n: int, clauses: list[tuple[str, bool]]) -> None:
    RESULTS[n] = clauses
    print(line(n))


# ----------------------------------------------------------------------
# criterion bodies


def criterion_1(hopf):
    ring, frame, P, C = hopf.ring, hopf.frame, hopf.poisson, hopf.connection
    gens, d, e = _span(hopf)
    a, b, c, dd = gens
    values = {
        (a, b): "-1/2*a*b", (a, c): "-1/2*a*c", (a, dd): "-b*c",
        (b, c): "0", (b, dd): "-1/2*b*d", (c, dd): "-1/2*c*d",
    }
    return [
        ("six bracket values", all(P.bracket(p, q) == ring.parse(v) for (p, q), v in values.items())),
        ("jacobiator on generator triples", _all_zero(jacobiator(P, *t) for t in combinations(gens, 3))),
        ("jacobiator with repeats", _all_zero(jacobiator(P, *t) for t in product(gens, repeat=3))),
        ("compatibility on (dg, e)", _all_zero(compatibility_defect(C, P, x, y) for x, y in product(d, e))),
        ("curvature on spanning set", _all_zero(curvature(C, P, x, y, z) for x, y, z in product(d, d, e))),
        ("connection constants t0=-2, t+-=-1",
         C.apply(d[0], e[0]) == e[0] * -a and C.apply(d[0], e[1]) == e[1] * (-a / 2)),
    ]


def criterion_2(selfaction, s1, hopf):
    out = []
    A, P, C = selfaction.action, selfaction.poisson, selfaction.connection
    gens, d, e = _span(selfaction)
    basis = selfaction.fibre.L.basis
    out.append(("PLG action on generator pairs",
                _all_zero(plg_action_defect(A, P, xi, p, q) for xi in basis for p, q in product(gens, gens))))
    pairs = list(product(d + e, d + e))
    out.append(("self-action connection covariance",
                _all_zero(conn_covariance_defect(A, P, C, xi, x, y) for xi in basis for x, y in pairs)))
    _, d1, e1 = _span(s1)
    out.append(("S1 group connection covariance",
                _all_zero(conn_covariance_defect(s1.action, s1.poisson, s1.connection, "H", x, y)
                          for x, y in product(d1 + e1, d1 + e1))))
    hA, hC, frame = hopf.action, hopf.connection, hopf.frame
    ep = frame.element("ep")
    _, hd, he = _span(hopf)
    worked = True
    for g in hopf.ring.gens():
        lhs = hA.on_form("H", hC.apply(frame.differential(g), ep))
        Hg = hA.on_function("H", g)
        worked &= lhs == ep * (-(g / 2) - Hg)
        worked &= lhs == hC.apply(frame.differential(Hg), ep) + hC.apply(frame.differential(g), hA.on_form("H", ep))
    out.append(("worked H action on connection along dg applied to e+", worked))
    out.append(("H on frame is 0, 2e+, -2e-",
                [hA.on_form("H", x) for x in he] == [frame.zero(), he[1] * 2, he[2] * -2]))
    out.append(("S1 action on Hopf bundle covariance",
                _all_zero(conn_covariance_defect(hA, hopf.poisson, hC, "H", x, y)
                          for x, y in product(hd + he, hd + he))))
    return out


def criterion_3(selfaction, s1):
    L = selfaction.fibre.L
    u1 = lb.lie_bialgebra_from_blocks(["H"], {}, {})
    u1_xi = lb.xi_from_block(["H"], {"H": {"H,H": "-1"}})
    cojac, cocycle = lb.check_cobracket(L)
    s1_xi = lb.xi_from_connection(s1.connection, s1.fibre.L, s1.fibre.frame_dual)
    su2_xi = lb.xi_from_connection(selfaction.connection, L, selfaction.fibre.frame_dual)
    # antisymmetrized Xi against the dual bracket read off the cobracket directly
    anti = True
    n = len(L.basis)
    for i, j, k in product(range(n), repeat=3):
        anti &= su2_xi.X[i, j, k] - su2_xi.X[j, i, k] == L.d[k, i, j]
    return [
        ("su2 co-Jacobi", lb.is_zero(cojac)),
        ("su2 cocycle", lb.is_zero(cocycle)),
        ("u1 Xi compatibility", lb.is_zero(lb.check_xi_compat(u1, u1_xi))),
        ("u1 Xi bicovariance", lb.is_zero(lb.check_bicovariant(u1, u1_xi))),
        ("u1 Xi pre-Lie", lb.is_zero(lb.check_prelie(u1, u1_xi))),
        ("S1 extraction gives -H(x)H", lb.xi_to_block(s1.fibre.L, s1_xi) == {"H": {"H,H": "-1"}}),
        ("su2 extraction antisymmetrizes to dual bracket", anti and lb.is_zero(lb.check_xi_compat(L, su2_xi))),
    ]


def criterion_4(hopf):
    ring, frame, P, C = hopf.ring, hopf.frame, hopf.poisson, hopf.connection
    gens, d, e = _span(hopf)
    pairs = list(product(d, e))
    F = hopf.action.fields["H"]
    e0 = frame.element("e0")
    # i_H of the connection along dg on e0 is -H(g) for each generator g
    da_e0 = interior(F, e0) == ring.one() and all(
        C.apply(frame.differential(g), e0) == e0 * -F(g) for g in gens
    )
    return [
        ("12 pairs enumerated", len(pairs) == 12),
        ("transversality on (dg, e)", _all_zero(transversality_defect(hopf, "H", x, y) for x, y in pairs)),
        ("(da, e0) value", da_e0 and transversality_defect(hopf, "H", d[0], e0).is_zero()),
        ("exact-form corollary on (dg, e)", _all_zero(cor52_check(hopf, "H", x, y) for x, y in pairs)),
    ]


SPHERE_CONNECTION = {
    ("z", "z"): {"dz": "(2*x-1)*z", "dx": "-2*z^2"},
    ("z", "zs"): {"dzs": "-(2*x-1)*z", "dx": "-2*x^2"},
    ("zs", "z"): {"dz": "(2*x-1)*zs", "dx": "2*x^2"},
    ("zs", "zs"): {"dzs": "-(2*x-1)*zs", "dx": "2*zs^2"},
    ("z", "x"): {"dx": "-(2*x-1)*z", "dz": "(2*x-1)*x"},
    ("zs", "x"): {"dx": "(2*x-1)*zs", "dzs": "-(2*x-1)*x"},
    ("x", "x"): {"dx": "(2*x-1)*x", "dzs": "2*x*z"},
}
SPHERE_TABLE = {
    ("x", "H"): "0", ("z", "H"): "-2*z", ("zs", "H"): "2*zs",
    ("x", "Xp"): "-z", ("z", "Xp"): "0", ("zs", "Xp"): "2*x-1",
    ("x", "Xm"): "zs", ("z", "Xm"): "1-2*x", ("zs", "Xm"): "0",
}


def criterion_5(base):
    M = base.spec
    ring, frame, A = M.ring, M.frame, M.action
    z, zs, x = ring.gens()
    dz, dzs, dx = (frame.differential(g) for g in (z, zs, x))
    _, d, _ = _span(M)
    value = M.connection.apply(dz, dzs)
    moved = A.on_form("Xp", value)
    return [
        ("{z,x} = xz", base.brackets[("z", "x")] == x * z),
        ("{z*,x} = -xz*", base.brackets[("zs", "x")] == -(x * zs)),
        ("{z,z*} = 2z*zx (target value)", base.brackets[("z", "zs")] == 2 * zs * z * x),
        ("{z,z*} = 2z*z - x from the commutation relation", base.brackets[("z", "zs")] == 2 * zs * z - x),
        ("7 connection values", all(base.connection[k] == frame.form(v) for k, v in SPHERE_CONNECTION.items())),
        ("base Jacobi", _all_zero(jacobiator(M.poisson, *t) for t in product(ring.gens(), repeat=3))),
        ("base compatibility", _all_zero(compatibility_defect(M.connection, M.poisson, p, q) for p, q in product(d, d))),
        ("9 su2 action values", base.symmetry_table == {k: ring.parse(v) for k, v in SPHERE_TABLE.items()}),
        ("worked Xp covariance",
         moved == frame.form({"dzs": "2*z^2", "dx": "2*z", "dz": "2*x^2"})
         and moved == frame.form({"dx": "4*z*(1-x)", "dz": "2*x*(2*x-1)"})
         and moved == M.connection.apply(dz, dx) * 2 + dx * (2 * z)
         and conn_covariance_defect(A, M.poisson, M.connection, "Xp", dz, dzs).is_zero()),
    ]


LITERAL_BRACKET_CLAUSE = "{z,z*} = 2z*zx (target value)"


def _monomials(ring, degree):
    out = []
    for deg in range(degree + 1):
        for combo in product(range(len(ring.visible)), repeat=deg):
            if list(combo) == sorted(combo):
                m = ring.one()
                for i in combo:
                    m = m * ring.gens()[i]
                out.append(m)
    return out


def criterion_6(hopf):
    raw = json.loads(resolve_path("su2_hopf").read_text())
    sym = build_spec(symbolic_alpha(raw))
    alpha = sym.spin.alpha["H"]
    A = sym.action
    base_gens = list(sym.bundle.base_generators.values())
    closed, zero_alpha, horizontal, equivariant = True, True, True, True
    degrees = set()
    for p in _monomials(sym.ring, 3):
        g = gamma(sym, p)
        expected = sym.frame.zero()
        for k, part in homogeneous_parts(sym, p).items():
            degrees.add(k)
            expected = expected + alpha * (part * -k)
        closed &= g == expected
        horizontal &= is_horizontal(sym, g)[0]
        equivariant &= A.on_form("H", g) == gamma(sym, A.on_function("H", p))
    for p in _monomials(hopf.ring, 3):
        zero_alpha &= gamma(hopf, p).is_zero()
    return [
        ("omega = e0 (x) H validates", _all_zero(v for _, _, v in validate_spin_connection(hopf))),
        ("Gamma = -|p| p alpha on degrees -3..3", closed and degrees == set(range(-3, 4))),
        ("Gamma = 0 when alpha = 0", zero_alpha),
        ("Leibniz gap on {x,z,z*} x {a,b,c,d}",
         _all_zero(leibniz_gap_check(sym, a, p) for a, p in product(base_gens, sym.ring.gens()))),
        ("Gamma horizontal", horizontal),
        ("Gamma H-equivariant", equivariant),
    ]


def _unreduced_product(ring, p, q):
    acc: dict = {}
    for m1, c1 in p.terms.items():
        for m2, c2 in q.terms.items():
            m = tuple(i + j for i, j in zip(m1, m2))
            acc[m] = acc.get(m, 0) + c1 * c2
    return Expr(ring, acc, normalize=False)


def criterion_7(hopf, base, s1):
    from test_poisson import CURVED, HOPF

    frame, P = hopf.frame, hopf.poisson
    out = []

    rnd = RandomSource(hopf, 0, "confluence", DEGREE_BOUND)
    srnd = RandomSource(base.spec, 0, "confluence sphere", DEGREE_BOUND)
    sring = base.spec.ring
    ok = True
    for _ in range(INSTANCES):
        p, q = rnd.poly(), rnd.poly()
        ok &= to_sympy(p * q) == su2_reduce(to_sympy(p) * to_sympy(q))
        sp, sq = srnd.poly(), srnd.poly()
        raw = _unreduced_product(sring, sp, sq)
        orders = [list(range(len(sring.rules))), list(reversed(range(len(sring.rules))))]
        ok &= len({normalize(raw, rule_order=o) for o in orders} | {sp * sq}) == 1
    out.append((f"normal-form confluence ({INSTANCES} SU2 + {INSTANCES} sphere)", ok))

    rnd = RandomSource(hopf, 0, "leibniz", DEGREE_BOUND)
    ok = True
    for _ in range(INSTANCES):
        p, q, r = rnd.poly(), rnd.poly(), rnd.poly()
        ok &= P.bracket(p, q * r) == P.bracket(p, q) * r + q * P.bracket(p, r)
        ok &= P.bracket(p + 2 * q, r) == P.bracket(p, r) + 2 * P.bracket(q, r)
        ok &= P.bracket(p, q) == -P.bracket(q, p)
    out.append(("bracket Leibniz and bilinearity", ok))

    rnd = RandomSource(hopf, 0, "schouten", DEGREE_BOUND)
    ok = True
    for _ in range(INSTANCES):
        p, q = rnd.poly(), rnd.poly()
        ok &= schouten(P, frame.differential(p), frame.differential(q), frame) == frame.differential(P.bracket(p, q))
    out.append(("schouten exactness", ok))

    # the curved connection lives on its own copy of the SU2 ring
    rnd = RandomSource(HOPF, 0, "tensoriality", DEGREE_BOUND)
    _, d, e = _span(HOPF)
    P = HOPF.poisson
    spanning = [(x, y, z) for x, y, z in product(d + e, d + e, e)]
    ok = True
    nonflat = False
    for k in range(INSTANCES):
        x, y, z = spanning[rnd.rng.randrange(len(spanning))]
        p = rnd.poly()
        ref = curvature(CURVED, P, x, y, z)
        nonflat |= not ref.is_zero()
        slot = k % 3
        args = [x, y, z]
        args[slot] = args[slot] * p
        ok &= curvature(CURVED, P, *args) == ref * p
    out.append(("curvature tensoriality on a curved connection", ok and nonflat))

    ok = True
    for seed in range(INSTANCES):
        first = emit_report(run_checks(s1, "jacobi,compat,curvature", seed=seed, workers=1), "json")
        second = emit_report(run_checks(s1, "jacobi,compat,curvature", seed=seed, workers=4), "json")
        ok &= first == second
    out.append(("byte-identical reports over seeds", ok))
    return out


# ----------------------------------------------------------------------
# tests


def test_criterion_1(hopf):
    clauses = criterion_1(hopf)
    _report(1, clauses)
    assert all(ok for _, ok in clauses), clauses


def test_criterion_2(selfaction, s1, hopf):
    clauses = criterion_2(selfaction, s1, hopf)
    _report(2, clauses)
    assert all(ok for _, ok in clauses), clauses


def test_criterion_3(selfaction, s1):
    clauses = criterion_3(selfaction, s1)
    _report(3, clauses)
    assert all(ok for _, ok in clauses), clauses


def test_criterion_4(hopf):
    clauses = criterion_4(hopf)
    _report(4, clauses)
    assert all(ok for _, ok in clauses), clauses


def test_criterion_5(base):
    """Every clause except the target {z,z*} value, which is tracked by the xfail below."""
    clauses = criterion_5(base)
    _report(5, clauses)
    assert all(ok for c, ok in clauses if c != LITERAL_BRACKET_CLAUSE), clauses


@pytest.mark.xfail(strict=True, reason="target {z,z*} = 2z*zx has degree 6; a quadratic bracket of quadratics gives 2z*z - x")
def test_criterion_5_target_bracket(base):
    z, zs, x = base.spec.ring.gens()
    assert base.brackets[("z", "zs")] == 2 * zs * z * x


def test_criterion_6(hopf):
    clauses = criterion_6(hopf)
    _report(6, clauses)
    assert all(ok for _, ok in clauses), clauses


def test_criterion_7(hopf, base, s1):
    clauses = criterion_7(hopf, base, s1)
    _report(7, clauses)
    assert all(ok for _, ok in clauses), clauses


if __name__ == "__main__":
    import time

    start = time.perf_counter()
    stamp = start
    hopf_, selfaction_, s1_ = load_spec("su2_hopf"), load_spec("su2_selfaction"), load_spec("s1_group")
    base_ = induce_base(hopf_)
    RESULTS[1] = criterion_1(hopf_)
    print(f"criterion 1 took {time.perf_counter() - stamp:.2f} s"); stamp = time.perf_counter()
    RESULTS[2] = criterion_2(selfaction_, s1_, hopf_)
    print(f"criterion 2 took {time.perf_counter() - stamp:.2f} s"); stamp = time.perf_counter()
    RESULTS[3] = criterion_3(selfaction_, s1_)
    print(f"criterion 3 took {time.perf_counter() - stamp:.2f} s"); stamp = time.perf_counter()
    RESULTS[4] = criterion_4(hopf_)
    print(f"criterion 4 took {time.perf_counter() - stamp:.2f} s"); stamp = time.perf_counter()
    RESULTS[5] = criterion_5(base_)
    print(f"criterion 5 took {time.perf_counter() - stamp:.2f} s"); stamp = time.perf_counter()
    RESULTS[6] = criterion_6(hopf_)
    print(f"criterion 6 took {time.perf_counter() - stamp:.2f} s"); stamp = time.perf_counter()
    RESULTS[7] = criterion_7(hopf_, base_, s1_)
    print(f"criterion 7 took {time.perf_counter() - stamp:.2f} s"); stamp = time.perf_counter()
    for n in TITLES:
        print(line(n))
    print(f"{time.perf_counter() - start:.1f} s")
