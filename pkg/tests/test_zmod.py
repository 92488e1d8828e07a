import random

import pytest
from hypothesis import given, strategies as st

from folcris.zmod import (
    ComplexNotValid,
    LinearSystem,
    Matrix,
    NoSolution,
    RingDescriptor,
    UsageError,
    homology_at,
    howell_form,
    howell_rows,
    is_invertible,
    kernel,
    quotient,
    span_contains,
)

from helpers import (
    brute_image,
    brute_kernel,
    check_matrix_against_brute,
    construct_then_solve,
    exhaustive_linear_algebra,
    span,
)

Z9 = RingDescriptor(3, 2)
Z25 = RingDescriptor(5, 2)
Z27 = RingDescriptor(3, 3)


@pytest.mark.parametrize("p,n", [(2, 1), (4, 1), (9, 1), (1, 1), (3, 0)])
def test_ring_rejects_bad_parameters(p, n):
    with pytest.raises(UsageError):
        RingDescriptor(p, n)


@pytest.mark.parametrize(
    "x,val", [(0, 2), (1, 0), (3, 1), (6, 1), (9, 2), (18, 2), (4, 0)]
)
def test_valuation_z9(x, val):
    assert Z9.valuation(x) == val


def test_signed_representatives():
    R = RingDescriptor(7, 2)
    assert [R.signed(v) for v in (0, 1, 24, 25, 48)] == [0, 1, 24, -24, -1]


@pytest.mark.parametrize("shape", [(1, 1), (1, 2), (2, 1)])
def test_small_shapes_exhaustive_z9(shape):
    count, problems = exhaustive_linear_algebra(Z9, shapes=(shape,))
    assert count == 9 ** (shape[0] * shape[1])
    assert problems == []


@given(st.lists(st.integers(0, 8), min_size=4, max_size=4))
def test_two_by_two_against_enumeration(entries):
    rows = [entries[:2], entries[2:]]
    assert check_matrix_against_brute(rows, Z9) == []


@pytest.mark.parametrize("seed", range(8))
def test_construct_then_solve_z25(seed):
    rng = random.Random(seed)
    for _ in range(25):
        assert construct_then_solve(Z25, rng) == []


@pytest.mark.parametrize("seed", range(3))
def test_construct_then_solve_z27_five(seed):
    rng = random.Random(100 + seed)
    for _ in range(10):
        assert construct_then_solve(Z27, rng, k=5) == []


def test_howell_property_and_transform():
    M = Matrix(Z9, [[3, 6], [0, 3], [6, 0]])
    H, U = howell_form(M)
    padded = M.vstack(Matrix.zeros(Z9, H.rows - M.rows, M.cols))
    assert U @ padded == H
    assert is_invertible(U)
    rows = howell_rows(M)
    # Howell: span of rows with leading zeros in the first k columns is spanned by the rows starting after k
    full = span([tuple(r) for r in rows.tolist()], Z9, 2)
    tail = {v for v in full if v[0] == 0}
    assert tail == span([tuple(r) for r in rows.tolist() if r[0] == 0], Z9, 2)


def test_howell_needs_padding_row():
    # [3, 1] alone spans (0, 3) only through 3*(3, 1) = (0, 3): the Howell form adds that row
    rows = howell_rows(Matrix(Z9, [[3, 1]]))
    assert rows.tolist() == [[3, 1], [0, 3]]


def test_kernel_of_multiplication_by_p():
    K = kernel(Matrix(Z9, [[3]]))
    assert span([tuple(K.col(j)) for j in range(K.cols)], Z9, 1) == {(0,), (3,), (6,)}


def test_solve_reports_residual():
    S = LinearSystem(Matrix(Z9, [[3, 0], [0, 0]]))
    with pytest.raises(NoSolution) as exc:
        S.solve([1, 0])
    assert any(exc.value.residual)
    assert Matrix(Z9, [[3, 0], [0, 0]]).apply(S.solve([6, 0])) == [6, 0]


def test_homology_requires_complex():
    with pytest.raises(ComplexNotValid):
        homology_at(Matrix(Z9, [[1]]), Matrix(Z9, [[1]]))


def test_homology_describes_mixed_module():
    # Z/9 -> Z/9^2 by (3, 0) then zero: H = Z/3 + Z/9
    dec = homology_at(Matrix(Z9, [[3], [0]]), Matrix.zeros(Z9, 1, 2))
    assert dec.free_rank == 1
    assert dec.torsion == (1,)
    assert dec.describe() == "Z/9 + Z/3"


def test_quotient_rejects_non_submodule():
    with pytest.raises(ComplexNotValid):
        quotient(Matrix(Z9, [[1], [0]]), Matrix(Z9, [[0], [1]]))


@given(st.lists(st.integers(0, 24), min_size=16, max_size=16), st.lists(st.integers(0, 24), min_size=4, max_size=4))
def test_construct_then_solve_random_4x4(entries, x):
    M = Matrix(Z25, [entries[i * 4:(i + 1) * 4] for i in range(4)])
    b = M.apply(x)
    y = LinearSystem(M).solve(b)
    assert M.apply(y) == b
    K = kernel(M)
    assert (M @ K).is_zero()
    diff = [(a - c) % 25 for a, c in zip(x, y)]
    assert span_contains(K, diff)


@given(st.lists(st.integers(0, 8), min_size=4, max_size=4))
def test_invertibility_matches_determinant(entries):
    M = Matrix(Z9, [entries[:2], entries[2:]])
    det = (entries[0] * entries[3] - entries[1] * entries[2]) % 9
    assert is_invertible(M) == (det % 3 != 0)


def test_object_dtype_for_large_modulus():
    R = RingDescriptor(10007, 4)
    assert R.dtype is object
    M = Matrix(R, [[R.modulus - 1, 2], [3, 4]])
    x = LinearSystem(M).solve([1, 0])
    assert M.apply(x) == [1, 0]


def test_brute_helpers_agree_on_identity():
    ident = [[1, 0], [0, 1]]
    assert brute_kernel(ident, Z9, 2) == {(0, 0)}
    assert len(brute_image(ident, Z9, 2)) == 81
