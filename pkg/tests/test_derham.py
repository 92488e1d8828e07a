import random

import pytest
from hypothesis import given, strategies as st

from folcris.derham import (
    Inconclusive,
    NotACocycle,
    TruncationError,
    derham_complex,
    find_primitive,
    supported_complex,
)
from folcris.forms import d
from folcris.syntax import format_form, parse_plain_poly

from helpers import form, one_variable_oracle, polynomial_derham_dims, presentation, random_form


def exponents(dec):
    return sorted(e for e, _ in dec.summands)


# --- one variable: the differential is diagonal on monomials


@pytest.mark.parametrize(
    "p,n,inverted,N",
    [(5, 1, None, 6), (5, 2, None, 5), (5, 2, None, 11), (3, 2, None, 7), (3, 3, None, 9),
     (3, 2, "x", 1), (3, 2, "x", 2), (3, 2, "x", 3), (5, 1, "x", 3), (7, 2, "x", 2)],
)
def test_one_variable_cohomology_matches_monomial_oracle(p, n, inverted, N):
    C = derham_complex(presentation(p, n, "x", inverted), N)
    expected = one_variable_oracle(C)
    assert [exponents(C.cohomology(j)) for j in (0, 1)] == expected


def test_a1_over_z25_values():
    pres = presentation(5, 2, "x")
    C = derham_complex(pres, 5)
    h0, h1 = C.cohomology_report(0), C.cohomology_report(1)
    assert h0.free_rank == 1 and h0.torsion == (1,)
    assert sorted(zip(h0.orders(), map(format_form, h0.representatives))) == [(5, "5*x^5"), (25, "1")]
    assert h1.free_rank == 0 and h1.torsion == (1,)
    assert [format_form(r) for r in h1.representatives] == ["x^4*dx"]


def test_localized_z9_values():
    pres = presentation(3, 2, "x", "x")
    C = derham_complex(pres, 3)
    assert [C.rank(j) for j in (0, 1)] == [7, 7]
    described = [[derham_complex(pres, N).cohomology(j).describe() for j in (0, 1)] for N in (1, 2, 3)]
    assert described == [
        ["Z/9", "Z/9"],
        ["Z/9", "Z/9"],
        ["Z/9 + Z/3 + Z/3", "Z/9 + Z/3 + Z/3"],
    ]


# --- several variables over prime fields, against sympy ranks


@pytest.mark.parametrize("p,vars,N", [(5, "xy", 3), (5, "xy", 6), (3, "xy", 5), (3, "xyz", 4), (7, "xyz", 3), (5, "xyz", 5)])
def test_polynomial_dims_match_sympy(p, vars, N):
    C = derham_complex(presentation(p, 1, vars), N)
    dims = [C.cohomology(j).free_rank for j in range(len(vars) + 1)]
    assert dims == polynomial_derham_dims(p, len(vars), N)
    assert all(not C.cohomology(j).torsion for j in range(len(vars) + 1))


def test_a2_f5_ranks():
    C = derham_complex(presentation(5, 1, "xy"), 2)
    assert [C.rank(j) for j in range(3)] == [6, 6, 1]


# --- structural properties

COMPLEXES = [
    (presentation(5, 1, "xy"), 4),
    (presentation(3, 2, "xy"), 3),
    (presentation(7, 1, "xy", "x"), 2),
    (presentation(5, 2, "x", "x + 1"), 3),
    (presentation(3, 1, "xyz"), 3),
]


@pytest.mark.parametrize("pres,N", COMPLEXES, ids=lambda v: str(v))
def test_matrices_agree_with_exterior_derivative(pres, N):
    C = derham_complex(pres, N)
    C.verify()
    for j in range(C.top):
        M = C.differential(j)
        for i in range(C.rank(j)):
            column = [M[r, i] for r in range(M.rows)] if M.rows else []
            assert C.decode(j + 1, column) == d(C.basis_form(j, i))


@pytest.mark.parametrize("pres,N", COMPLEXES, ids=lambda v: str(v))
@given(seed=st.integers(0, 10**6))
def test_encode_decode_round_trip(pres, N, seed):
    C = derham_complex(pres, N)
    rng = random.Random(seed)
    j = rng.randrange(C.top + 1)
    vec = [rng.randrange(pres.ring.modulus) for _ in range(C.rank(j))]
    a = C.decode(j, vec)
    assert C.encode(j, a) == vec
    assert C.decode(j, C.encode(j, a)) == a


def test_form_outside_truncation_is_rejected():
    pres = presentation(5, 1, "xy")
    C = derham_complex(pres, 2)
    with pytest.raises(TruncationError):
        C.encode(1, form(pres, "x^3*dy"))


@pytest.mark.parametrize("pres,N", COMPLEXES[:3], ids=lambda v: str(v))
@given(seed=st.integers(0, 10**6))
def test_exact_forms_have_primitives(pres, N, seed):
    C = derham_complex(pres, N)
    rng = random.Random(seed)
    j = rng.randrange(C.top)
    b = C.decode(j, [rng.randrange(pres.ring.modulus) for _ in range(C.rank(j))])
    a = d(b)
    prim = find_primitive(a, C, j + 1)
    assert not isinstance(prim, Inconclusive)
    assert d(prim) == a


def test_find_primitive_cases():
    pres = presentation(5, 1, "xy")
    C = derham_complex(pres, 5)
    prim = find_primitive(form(pres, "dx*dy"), C)
    assert d(prim) == form(pres, "dx*dy")
    miss = find_primitive(form(pres, "x^4*dx"), C)
    assert isinstance(miss, Inconclusive) and not miss
    with pytest.raises(NotACocycle):
        find_primitive(form(pres, "x*dy"), C)


# --- supported complex


def test_supported_complex_on_a1():
    pres = presentation(5, 1, "x")
    h = parse_plain_poly(pres.ring, pres.vars, "x")
    S = supported_complex(pres, h, 3)
    assert [S.cohomology(j).describe() for j in range(3)] == ["0", "0", "Z/5"]
    trivial = supported_complex(pres, parse_plain_poly(pres.ring, pres.vars, "1"), 3)
    assert all(trivial.cohomology(j).is_zero() for j in range(3))


@pytest.mark.parametrize("pres,h", [(presentation(5, 1, "xy"), "x"), (presentation(3, 2, "x"), "x + 1")])
def test_supported_complex_is_a_complex(pres, h):
    S = supported_complex(pres, parse_plain_poly(pres.ring, pres.vars, h), 2)
    for j in range(len(S.matrices) - 1):
        assert (S.matrices[j + 1] @ S.matrices[j]).is_zero()
    rng = random.Random(1)
    for j in range(1, len(S.matrices)):
        vec = [rng.randrange(pres.ring.modulus) for _ in range(S.rank(j))]
        a, b = S.decode(j, vec)
        image = S.decode(j + 1, S.differential(j).apply(vec))
        assert image == S.fiber_differential(a, b)


def test_random_forms_land_in_large_truncation():
    pres = presentation(7, 1, "xy")
    rng = random.Random(3)
    C = derham_complex(pres, 8)
    for _ in range(20):
        a = random_form(pres, rng, degree=1)
        assert C.decode(1, C.encode(1, a)) == a
