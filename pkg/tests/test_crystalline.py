import pytest

from folcris.chernweil import Connection, InvariantPolynomial
from folcris.crystalline import (
    Obstruction,
    WrongReduction,
    certificates_agree_mod_p,
    compare_s_structures,
    crystalline_cohomology,
    crystalline_complex,
    crystalline_residue,
    lift_foliation,
    lift_presentation,
    reduction_commutes,
    verify_c4,
)
from folcris.forms import d
from folcris.foliation import bott_connection, check_integrability
from folcris.gallery import FOLIATIONS
from folcris.recheck import chern_by_cofactors, curvature_of
from folcris.syntax import format_form, parse_plain_poly
from folcris.zmod import UsageError

from helpers import form, one_variable_oracle, presentation


def base_distribution(name):
    p, vars, gens, locus = FOLIATIONS[name]
    pres = presentation(p, 1, vars, locus)
    return check_integrability(pres, [form(pres, g) for g in gens])


def test_a1_crystalline_values():
    L = lift_presentation(presentation(5, 1, "x"), 2)
    h0, h1 = crystalline_cohomology(L, 0, 5), crystalline_cohomology(L, 1, 5)
    assert (h0.free_rank, h0.torsion) == (1, (1,))
    assert (h1.free_rank, h1.torsion) == (0, (1,))
    assert [format_form(r) for r in h1.representatives] == ["x^4*dx"]


@pytest.mark.parametrize("p,n,N", [(5, 2, 7), (3, 3, 10), (7, 2, 8)])
def test_a1_crystalline_against_monomial_oracle(p, n, N):
    C = crystalline_complex(lift_presentation(presentation(p, 1, "x"), n), N)
    assert [sorted(e for e, _ in C.cohomology(j).summands) for j in (0, 1)] == one_variable_oracle(C)


@pytest.mark.parametrize("vars,inverted,N", [("x", None, 6), ("xy", None, 3), ("xy", "x", 2)])
def test_reduction_commutes_with_d(vars, inverted, N):
    assert reduction_commutes(lift_presentation(presentation(5, 1, vars, inverted), 2), N)


def test_lift_requires_prime_field():
    with pytest.raises(UsageError):
        lift_presentation(presentation(5, 2, "x"), 2)


@pytest.mark.parametrize("name", list(FOLIATIONS))
@pytest.mark.parametrize("n", [2, 3])
def test_c4_reduces_to_base(name, n):
    F = base_distribution(name)
    L = lift_presentation(F.pres, n)
    SS = lift_foliation(F, L)
    gens, alpha = SS.reduce()
    assert gens == F.generators
    assert SS.witness_reduces and alpha == F.alpha
    phi = InvariantPolynomial.parse(L.lifted.ring, "X1^2" if F.d == 1 else "X1^3")
    cert = verify_c4(SS, phi)
    assert not dict(cert.forms)["phi_form"]
    # independent: the lifted Bott connection's Chern forms, recomputed by cofactors
    A = [list(r) for r in bott_connection(SS.distribution).connection.A]
    cs = chern_by_cofactors(curvature_of(A), L.lifted)
    top = cs[1]
    for _ in range(phi.weight - 1):
        top = top.wedge(cs[1])
    assert not top
    assert certificates_agree_mod_p(SS, phi)


def test_obstructed_lift():
    F = check_integrability(presentation(7, 1, "xyz"), [form(presentation(7, 1, "xyz"), "dz")])
    L = lift_presentation(F.pres, 2)
    with pytest.raises(Obstruction) as info:
        lift_foliation(F, L, [[form(L.lifted, "dz + 7*y*dx")]])
    assert info.value.valuation == 1
    (res,) = info.value.residual
    assert res == form(L.lifted, "7*dy*dx")
    assert not res.change_ring(F.pres)


def test_wrong_reduction():
    pres = presentation(7, 1, "xyz")
    F = check_integrability(pres, [form(pres, "dz")])
    L = lift_presentation(pres, 2)
    with pytest.raises(WrongReduction):
        lift_foliation(F, L, [[form(L.lifted, "dz + y*dx")]])


def test_first_integrable_proposal_wins():
    pres = presentation(7, 1, "xyz")
    F = check_integrability(pres, [form(pres, "dz")])
    L = lift_presentation(pres, 2)
    SS = lift_foliation(F, L, [[form(L.lifted, "dz + 7*y*dx")], [form(L.lifted, "dz + 7*x*dx")]])
    assert SS.distribution.generators == (form(L.lifted, "dz + 7*x*dx"),)


@pytest.mark.parametrize("lam", [2, 5])
def test_lift_independence_of_c4(lam):
    pres = presentation(11, 1, "xy", "x")
    F = check_integrability(pres, [form(pres, f"x*dy - {lam}*y*dx")])
    L = lift_presentation(pres, 2)
    phi = InvariantPolynomial.parse(L.lifted.ring, "X1^2")
    for shift in (0, 1, 3):
        SS = lift_foliation(F, L, [[form(L.lifted, f"x*dy - {lam + 11 * shift}*y*dx")]])
        assert SS.reduce()[0] == F.generators
        assert certificates_agree_mod_p(SS, phi)


@pytest.mark.parametrize("lam", range(1, 11))
@pytest.mark.parametrize("four_dim", [False, True])
def test_crystalline_residue_family(lam, four_dim):
    vars, conn = ("xyzw", "z*dw + x*dy") if four_dim else ("xy", "x*dy")
    X0 = presentation(11, 1, vars)
    L = lift_presentation(X0, 2)
    X = L.lifted
    h = parse_plain_poly(X.ring, X.vars, "x")
    U0 = X0.localize(parse_plain_poly(X0.ring, X0.vars, "x"))
    LU = lift_presentation(U0, 2)
    F = check_integrability(U0, [form(U0, f"x*dy - {lam}*y*dx")])
    phi = InvariantPolynomial.parse(X.ring, "X1^2")
    g = Connection(X, ((form(X, conn),),))
    residues = []
    for mu in (lam, lam + 11):
        SS = lift_foliation(F, LU, [[form(LU.lifted, f"x*dy - {mu}*y*dx")]])
        r = crystalline_residue(SS, X, h, g, phi)
        assert not d(r.a) and r.a.restrict(LU.lifted, h) == d(r.b)
        residues.append(r)
    diff = compare_s_structures(*residues)
    assert diff.status in ("zero", "exact")
    if diff.status == "exact":
        a2, b2 = diff.primitive
        assert d(a2) == diff.a and a2.restrict(LU.lifted, h) - d(b2) == diff.b
    if not four_dim:
        assert diff.status == "zero"
