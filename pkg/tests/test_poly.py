import random

import pytest
from hypothesis import given, strategies as st

from folcris.poly import (
    LocalizedPoly,
    PresentationRejected,
    VarietyPresentation,
    format_poly,
    invert_unit,
    partial_derivative,
)
from folcris.syntax import SyntaxProblem, parse_plain_poly, parse_poly
from folcris.zmod import RingDescriptor

from helpers import presentation, random_poly

PRESENTATIONS = [
    presentation(5, 1, "xy"),
    presentation(3, 2, "xy", "x"),
    presentation(7, 1, "xy", "x + 1"),
    presentation(5, 2, "x", "x^2 + 2"),
]


def polys(pres):
    return st.integers(0, 2**32 - 1).map(lambda s: random_poly(pres, random.Random(s)))


@pytest.mark.parametrize("pres", PRESENTATIONS, ids=str)
@given(data=st.data())
def test_ring_laws(pres, data):
    a, b, c = (data.draw(polys(pres)) for _ in range(3))
    assert (a + b) + c == a + (b + c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a - a == pres.const(0)


@pytest.mark.parametrize("pres", PRESENTATIONS, ids=str)
@given(data=st.data())
def test_leibniz_rule_for_partials(pres, data):
    a, b = data.draw(polys(pres)), data.draw(polys(pres))
    for i in range(pres.nvars):
        assert partial_derivative(a * b, i) == partial_derivative(a, i) * b + a * partial_derivative(b, i)


@pytest.mark.parametrize("pres", PRESENTATIONS, ids=str)
@given(data=st.data())
def test_format_parse_round_trip(pres, data):
    a = data.draw(polys(pres))
    assert parse_poly(pres, format_poly(a)) == a


def test_difference_of_squares_z9():
    R = presentation(3, 2, "x")
    assert parse_poly(R, "(x + 3)*(x - 3)") == parse_poly(R, "x^2")


def test_inverse_of_x():
    U = presentation(5, 1, "x", "x")
    assert parse_poly(U, "x * x^-1") == U.const(1)
    assert str(partial_derivative(parse_poly(U, "x^-1"), 0)) == "-x^-2"


@pytest.mark.parametrize("p,n,expected", [(5, 2, "5*x^4"), (5, 1, "0")])
def test_derivative_of_x5(p, n, expected):
    pres = presentation(p, n, "x")
    assert str(partial_derivative(parse_poly(pres, "x^5"), 0)) == expected


@pytest.mark.parametrize(
    "h,unit",
    [("x", "2*x^2"), ("x", "1 + 3*x"), ("x + 1", "(x + 1)^3 * 2"), ("x", "x^2 + 3"), ("x", "x^-1 + 3*y")],
)
def test_invert_unit_z9(h, unit):
    U = presentation(3, 2, "xy", h)
    f = parse_poly(U, unit)
    assert f * invert_unit(f) == U.const(1)


def test_invert_unit_rejects_non_units():
    U = presentation(7, 1, "xy", "x")
    for text in ("y", "x + 1", "0"):
        with pytest.raises(ZeroDivisionError):
            invert_unit(parse_poly(U, text))


def test_unit_up_to_nilpotent():
    # 1 + 3y is a unit in Z/9 with inverse 1 - 3y
    A = presentation(3, 2, "xy")
    f = parse_poly(A, "1 + 3*y")
    assert invert_unit(f) == parse_poly(A, "1 - 3*y")


@pytest.mark.parametrize("h", ["3*x", "0", "3"])
def test_rejects_non_unit_leading_coefficient(h):
    ring = RingDescriptor(3, 2)
    with pytest.raises(PresentationRejected):
        VarietyPresentation.create(ring, ["x"], parse_plain_poly(ring, ["x"], h))


def test_unit_constant_is_trivialized():
    ring = RingDescriptor(7, 1)
    pres = VarietyPresentation.create(ring, ["x"], parse_plain_poly(ring, ["x"], "4"))
    assert not pres.localized


@pytest.mark.parametrize("names", [["x", "x"], ["x", "dx"], ["X"], ["1x"]])
def test_bad_variable_names(names):
    with pytest.raises((PresentationRejected, ValueError)):
        VarietyPresentation.create(RingDescriptor(5), names)


def test_lowest_terms():
    U = presentation(5, 1, "xy", "x")
    a = parse_poly(U, "x^2 * x^-3")
    assert a.m == 1 and str(a) == "x^-1"


def test_restriction_to_open():
    X = presentation(7, 1, "xy")
    U = presentation(7, 1, "xy", "x")
    f = parse_poly(X, "x*y + 1")
    assert f.change_presentation(U, {(1, 0): 1}) == parse_poly(U, "x*y + 1")


@pytest.mark.parametrize(
    "text,pos",
    [("x +", 3), ("x ** 2", 3), ("y^-1", 1), ("(x", 2), ("x $ y", 2)],
)
def test_syntax_errors_carry_positions(text, pos):
    U = presentation(7, 1, "xy", "x")
    with pytest.raises(SyntaxProblem) as exc:
        parse_poly(U, text)
    assert exc.value.position is not None
    assert abs(exc.value.position - pos) <= 2


def test_mixed_localization_in_product():
    U = presentation(7, 1, "xy", "x")
    assert parse_poly(U, "(y + x)*x^-1") == parse_poly(U, "1 + y*x^-1")
    assert isinstance(parse_poly(U, "y*x^-1"), LocalizedPoly)
