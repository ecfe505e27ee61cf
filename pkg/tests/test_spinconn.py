import copy
import json
from itertools import product

import pytest
from hypothesis import given, settings

from plgb.spec import SpecError, build_spec, resolve_path
from plgb.spinconn import (
    SpinError,
    gamma,
    homogeneous_parts,
    is_basic_function,
    leibniz_gap_check,
    nabla_P,
    symbolic_alpha,
    validate_spin_connection,
    varsigma,
    varsigma_cross_check,
)
from test_symkernel import polys

RAW = json.loads(resolve_path("su2_hopf").read_text())
SYM = build_spec(symbolic_alpha(RAW))
RING, FRAME = SYM.ring, SYM.frame
ALPHA = SYM.spin.alpha["H"]


def _nonzero(records):
    return [(k, label) for k, label, v in records if not v.is_zero()]


def test_spin_connection_validates(hopf):
    assert _nonzero(validate_spin_connection(hopf)) == []
    assert _nonzero(validate_spin_connection(SYM)) == []


def test_wrong_omega_fails_verticality():
    raw = copy.deepcopy(RAW)
    raw["spin_connection"]["omega"] = {"H": {"ep": "1"}}
    bad = _nonzero(validate_spin_connection(build_spec(raw)))
    assert ("verticality", "i_H(omega^H)") in bad


def test_non_horizontal_alpha_detected():
    raw = copy.deepcopy(RAW)
    raw["spin_connection"]["alpha"] = {"H": {"e0": "1"}}
    bad = _nonzero(validate_spin_connection(build_spec(raw)))
    assert ("horizontality", "i_H(alpha^H)") in bad


def test_nabla_P_of_generators(hopf):
    frame, ring = hopf.frame, hopf.ring
    assert nabla_P(hopf, ring.gen("c")) == frame.element("ep") * ring.gen("d")
    assert nabla_P(hopf, ring.gen("b")) == frame.element("em") * ring.gen("a")
    z = ring.parse("c*d")
    assert nabla_P(hopf, z) == frame.differential(z)


def test_gamma_example():
    p = RING.parse("b*c^2")
    assert homogeneous_parts(SYM, p) == {1: p}
    assert gamma(SYM, p) == ALPHA * (-p)


def test_gamma_vanishes_without_alpha(hopf):
    for p in (hopf.ring.parse(s) for s in ("b*c^2", "a", "a^2*d + c", "b")):
        assert gamma(hopf, p).is_zero()


@settings(max_examples=100, derandomize=True, deadline=None)
@given(polys(RING, 3))
def test_gamma_closed_form(p):
    """On a part of degree k, Gamma is -k p alpha."""
    expected = FRAME.zero()
    for k, part in homogeneous_parts(SYM, p).items():
        expected = expected + ALPHA * (part * -k)
    assert gamma(SYM, p) == expected


@settings(max_examples=60, derandomize=True, deadline=None)
@given(polys(RING, 3))
def test_gamma_equivariant(p):
    A = SYM.action
    assert A.on_form("H", gamma(SYM, p)) == gamma(SYM, A.on_function("H", p))


def test_varsigma_values(hopf):
    frame, ring = hopf.frame, hopf.ring
    assert varsigma(hopf, frame.differential(ring.parse("c*d")) * ring.gen("b")).is_zero()
    with pytest.raises(SpinError, match="horizontal"):
        varsigma(hopf, frame.element("e0"))


def test_leibniz_gap_and_varsigma_cross_check():
    base = SYM.bundle.base_generators
    for (name, a), p in product(base.items(), RING.gens()):
        assert is_basic_function(SYM, a)
        assert leibniz_gap_check(SYM, a, p).is_zero(), (name, p)
        assert varsigma_cross_check(SYM, a, p).is_zero(), (name, p)


def test_leibniz_gap_needs_base_function():
    with pytest.raises(SpinError, match="base function"):
        leibniz_gap_check(SYM, RING.gen("a"), RING.gen("b"))


def test_homogeneous_parts_split():
    p = RING.parse("a + b + c*d")
    assert homogeneous_parts(SYM, p) == {1: RING.gen("a"), -1: RING.gen("b"), 0: RING.parse("c*d")}


def test_symbolic_alpha_rejects_name_clash():
    raw = copy.deepcopy(RAW)
    raw["ring"]["generators"] = list(raw["ring"]["generators"]) + ["s_p"]
    with pytest.raises(SpinError):
        symbolic_alpha(raw)


def test_spin_block_needs_action():
    raw = copy.deepcopy(RAW)
    for k in ("action", "bundle"):
        raw.pop(k)
    with pytest.raises(SpecError):
        build_spec(raw)
