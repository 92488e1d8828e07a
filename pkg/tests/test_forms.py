import random

import pytest
from hypothesis import given, strategies as st

from folcris.forms import Form, d, merge_sign
from folcris.syntax import format_form, parse_form

from helpers import form, forms, presentation, random_form

CONFIGS = [
    presentation(5, 1, "xyz"),
    presentation(7, 1, "xy", "x"),
    presentation(3, 2, "xyz"),
    presentation(5, 2, "xy", "y + 1"),
]


@pytest.mark.parametrize("pres", CONFIGS, ids=str)
@given(data=st.data())
def test_d_squared_is_zero(pres, data):
    a = data.draw(forms(pres))
    assert not d(d(a))


@pytest.mark.parametrize("pres", CONFIGS, ids=str)
@given(data=st.data(), j=st.integers(0, 2))
def test_graded_leibniz(pres, data, j):
    a = data.draw(forms(pres, degree=min(j, pres.nvars)))
    b = data.draw(forms(pres))
    sign = -1 if a.degree % 2 else 1
    assert d(a.wedge(b)) == d(a).wedge(b) + a.wedge(d(b)).scale(sign)


@pytest.mark.parametrize("pres", CONFIGS, ids=str)
@given(data=st.data(), i=st.integers(0, 2), j=st.integers(0, 2))
def test_graded_commutativity(pres, data, i, j):
    a = data.draw(forms(pres, degree=min(i, pres.nvars)))
    b = data.draw(forms(pres, degree=min(j, pres.nvars)))
    sign = -1 if (a.degree * b.degree) % 2 else 1
    assert a.wedge(b) == b.wedge(a).scale(sign)


@pytest.mark.parametrize("pres", CONFIGS, ids=str)
@given(data=st.data())
def test_wedge_associative_and_bilinear(pres, data):
    a, b, c = (data.draw(forms(pres)) for _ in range(3))
    assert (a.wedge(b)).wedge(c) == a.wedge(b.wedge(c))
    assert a.wedge(b + c) == a.wedge(b) + a.wedge(c)


@pytest.mark.parametrize("pres", CONFIGS, ids=str)
@given(data=st.data())
def test_form_text_round_trip(pres, data):
    a = data.draw(forms(pres))
    assert parse_form(pres, format_form(a)) == a


@given(st.integers(0, 2**32 - 1))
def test_restriction_commutes_with_d(seed):
    X = presentation(7, 1, "xy")
    U = presentation(7, 1, "xy", "x")
    a = random_form(X, random.Random(seed))
    assert d(a).restrict(U, {(1, 0): 1}) == d(a.restrict(U, {(1, 0): 1}))


@given(st.integers(0, 2**32 - 1))
def test_reduction_commutes_with_d(seed):
    big = presentation(5, 2, "xyz")
    small = presentation(5, 1, "xyz")
    a = random_form(big, random.Random(seed))
    assert d(a).change_ring(small) == d(a.change_ring(small))


@pytest.mark.parametrize(
    "a,b,sign,merged",
    [((0,), (1,), 1, (0, 1)), ((1,), (0,), -1, (0, 1)), ((0, 2), (1,), -1, (0, 1, 2)), ((0,), (0,), 0, None)],
)
def test_merge_sign(a, b, sign, merged):
    assert merge_sign(a, b) == (sign, merged)


def test_simple_values():
    A = presentation(7, 1, "xy")
    assert d(form(A, "x*y")) == form(A, "y*dx + x*dy")
    assert form(A, "dx*dy") == -form(A, "dy*dx")
    assert not form(A, "dx*dx")
    assert form(A, "x*dy - 2*y*dx").degree == 1


def test_inverse_powers_in_forms():
    U = presentation(7, 1, "xy", "x")
    assert d(form(U, "x^-1")) == form(U, "-x^-2*dx")
    assert format_form(form(U, "x^-1*dx*dy")) == "x^-1*dx*dy"


def test_mixed_degrees_keep_components():
    A = presentation(5, 1, "xy")
    a = form(A, "x + dy")
    assert a.degrees() == {0, 1}
    assert a.homogeneous_part(1) == form(A, "dy")
    with pytest.raises(ValueError):
        _ = a.degree


def test_zero_form_behaviour():
    A = presentation(5, 1, "x")
    z = Form.zero(A)
    assert not z and z == form(A, "0") and format_form(z) == "0"
