import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plgb.calculus import (
    Frame,
    FrameError,
    OneForm,
    VectorField,
    d_oneform,
    interior,
    interior2,
    lie_derivative,
    oneform_from_pdq,
    wedge,
)
from plgb.spec import load_spec
from plgb.symkernel import Ring
from test_symkernel import polys

HOPF = load_spec("su2_hopf")
RING, FRAME = HOPF.ring, HOPF.frame
a, b, c, d = RING.gens()


def forms(frame: Frame = FRAME):
    return st.lists(polys(frame.ring, 3, 2), min_size=frame.dim, max_size=frame.dim).map(
        lambda cs: OneForm(frame, tuple(cs))
    )


def test_differential_of_z():
    # c dd + d dc with dc = c e0 + d e+, dd = -d e0 + c e-
    assert FRAME.differential(c * d) == FRAME.form({"ep": "d^2", "em": "c^2"})


def test_oneform_from_pdq():
    assert oneform_from_pdq(d, a, FRAME) == FRAME.form({"e0": "1 + b*c", "ep": "b*d"})


def test_dual_fields_pair_with_frame():
    duals = FRAME.dual_fields()
    for name, V in duals.items():
        for other in FRAME.names:
            assert interior(V, FRAME.element(other)) == (RING.one() if other == name else RING.zero())
    # the field dual to e+ sends a to b
    assert duals["ep"](a) == b


def test_frame_round_trip_and_d2():
    assert FRAME.check_round_trip() == []
    assert FRAME.check_relations() == []
    assert FRAME.check_d2() == []


def test_d_table_violating_relation_rejected():
    ring = Ring(["a", "b", "c", "d"], relations=[("a*d", "1 + b*c")])
    bad = {"a": {"e0": "a", "ep": "b"}, "b": {"e0": "-b", "em": "a"}, "c": {"e0": "c", "ep": "d"}, "d": {"e0": "d", "em": "c"}}
    in_diff = {"e0": [("d", "a"), ("-b", "c")], "ep": [("a", "c"), ("-c", "a")], "em": [("d", "b"), ("-b", "d")]}
    frame = Frame(ring, ["e0", "ep", "em"], bad, in_differentials=in_diff)
    # dd has the wrong sign on e0, so d(ad - bc - 1) is nonzero
    assert frame.check_relations()


def test_hopf_field_acts_on_frame():
    H = HOPF.action.fields["H"]
    assert [lie_derivative(H, FRAME.element(e), FRAME) for e in FRAME.names] == [
        FRAME.zero(),
        FRAME.element("ep") * 2,
        FRAME.element("em") * -2,
    ]


def test_interior2_convention():
    duals = FRAME.dual_fields()
    two = wedge(FRAME.element("e0"), FRAME.element("ep"))
    assert interior2(duals["e0"], duals["ep"], two) == RING.one()
    assert interior2(duals["ep"], duals["e0"], two) == -RING.one()


def test_exact_frame_with_relation(base):
    M = base.spec
    z, zs, x = M.ring.gens()
    dz, dzs, dx = (M.frame.differential(g) for g in (z, zs, x))
    # zs dz + z dzs + (2x - 1) dx = 0
    assert (dz * zs + dzs * z + dx * (2 * x - 1)).is_zero()
    assert not dz.is_zero()
    assert M.frame.differential(zs * z) == M.frame.differential(x - x * x)


def test_overcomplete_frame_requires_in_differentials():
    ring = Ring(["t"])
    with pytest.raises(FrameError):
        Frame(ring, ["f", "g"], {"t": {"f": "1"}})


@settings(max_examples=100, derandomize=True, deadline=None)
@given(polys(RING, 3), polys(RING, 3))
def test_differential_is_a_derivation(p, q):
    assert FRAME.differential(p * q) == FRAME.differential(q) * p + FRAME.differential(p) * q


@settings(max_examples=60, derandomize=True, deadline=None)
@given(polys(RING, 3))
def test_d_squared_vanishes(p):
    assert d_oneform(FRAME.differential(p)).is_zero()


@settings(max_examples=60, derandomize=True, deadline=None)
@given(polys(RING, 3), st.sampled_from(["e0", "ep", "em"]))
def test_interior_of_differential_is_field(p, name):
    V = FRAME.dual_fields()[name]
    assert interior(V, FRAME.differential(p)) == V(p)


@settings(max_examples=60, derandomize=True, deadline=None)
@given(forms(), polys(RING, 2))
def test_cartan_formula(eta, p):
    H = HOPF.action.fields["H"]
    # L_H(p eta) = H(p) eta + p L_H eta
    lhs = lie_derivative(H, eta * p, FRAME)
    assert lhs == eta * H(p) + lie_derivative(H, eta, FRAME) * p


def test_vector_field_rejects_unknown_generator():
    with pytest.raises(FrameError):
        VectorField(FRAME, {"q": "a"})
