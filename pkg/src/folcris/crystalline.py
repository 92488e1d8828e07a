"""Crystalline cohomology through smooth lifts, S-structures and crystalline Bott vanishing.

A variety over F_p presented by a polynomial ring (optionally localized) lifts
to Z/p^n by taking coefficient representatives in [0, p). Crystalline
cochains at level n are the de Rham cochains of that lift.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .chernweil import (
    ChainCertificate,
    Connection,
    DifferenceClass,
    HypothesisUnmet,
    InvariantPolynomial,
    ResidueClass,
    difference_class,
    residue,
    verify_bott_vanishing,
)
from .derham import CohomologyReport, TruncatedComplex, derham_complex
from .forms import Form
from .foliation import Distribution, NotIntegrable, bott_connection, check_integrability
from .poly import Exp, LocalizedPoly, VarietyPresentation
from .zmod import Matrix, RingDescriptor, UsageError


class WrongReduction(UsageError):
    """A proposed lift does not reduce to the given data mod p."""


class Obstruction(Exception):
    """The proposed lift is not integrable mod p^n.

    ``residual`` holds the part of ``dω̃_i`` outside ``D̃ ∧ Ω¹``; it vanishes
    mod p, and ``valuation`` is the largest k with every coefficient divisible by p^k.
    """

    def __init__(self, message: str, residual: Sequence[Form], valuation: int):
        super().__init__(message)
        self.residual = tuple(residual)
        self.valuation = valuation


@dataclass(frozen=True)
class Lift:
    base: VarietyPresentation
    lifted: VarietyPresentation

    @property
    def level(self) -> int:
        return self.lifted.ring.n

    def lift_form(self, a: Form) -> Form:
        """Coefficient-wise lift with symmetric representatives in (-p/2, p/2).

        For forms written with small integer coefficients this is the same as
        reading the text again over Z/p^n.
        """
        ring = self.base.ring
        N = self.lifted.ring.modulus

        def lift(c):
            num = {e: ring.signed(v) % N for e, v in c.num.items()}
            return LocalizedPoly(self.lifted, num, c.m)

        return a.map_coefficients(self.lifted, lift)

    def reduce_form(self, a: Form) -> Form:
        return a.change_ring(self.base)


def lift_presentation(base: VarietyPresentation, n: int) -> Lift:
    if base.ring.n != 1:
        raise UsageError(f"crystalline lifts start from a prime field, got {base.ring}")
    if n < 1:
        raise UsageError("lift level must be >= 1")
    ring = RingDescriptor(base.ring.p, n)
    inverted = dict(base.inverted) if base.inverted is not None else None
    lifted = VarietyPresentation.create(ring, base.vars, inverted)
    return Lift(base, lifted)


def crystalline_complex(L: Lift, N: int) -> TruncatedComplex:
    C = derham_complex(L.lifted, N)
    C.label = f"crystalline (level {L.level})"
    return C


def crystalline_cohomology(L: Lift, j: int, N: int) -> CohomologyReport:
    return crystalline_complex(L, N).cohomology_report(j)


def reduction_commutes(L: Lift, N: int) -> bool:
    """Reduction mod p is a chain map from the lifted truncation to the base one (same bases)."""
    C = derham_complex(L.lifted, N)
    B = derham_complex(L.base, N)
    if [b for b in C.bases] != [b for b in B.bases]:
        return False
    for M, Mb in zip(C.matrices, B.matrices):
        if Matrix(L.base.ring, M.tolist()) != Mb:
            return False
    return True


@dataclass(frozen=True)
class SStructure:
    lift: Lift
    base: Distribution
    distribution: Distribution
    witness_reduces: bool

    def reduce(self) -> tuple[tuple[Form, ...], tuple[tuple[Form, ...], ...]]:
        gens = tuple(self.lift.reduce_form(w) for w in self.distribution.generators)
        alpha = tuple(tuple(self.lift.reduce_form(a) for a in row) for row in self.distribution.alpha)
        return gens, alpha


def _form_valuation(forms: Sequence[Form]) -> int:
    best = None
    for f in forms:
        for c in f.terms.values():
            for v in c.num.values():
                k = f.pres.ring.valuation(v)
                best = k if best is None else min(best, k)
    return f.pres.ring.n if best is None else best


def lift_foliation(
    F: Distribution,
    L: Lift,
    proposals: Optional[Sequence[Sequence[Form]]] = None,
) -> SStructure:
    """S-structure on F over Z/p^n: verbatim lift, or the first valid proposal.

    Each proposal is a list of lifted generators. Raises WrongReduction if a
    proposal does not reduce to F and Obstruction (for the first candidate)
    if none is integrable.
    """
    if F.pres != L.base:
        raise UsageError("distribution and lift have different base presentations")
    candidates = [tuple(L.lift_form(w) for w in F.generators)] if proposals is None else [tuple(p) for p in proposals]
    if not candidates:
        raise UsageError("no lift proposals given")
    first_obstruction = None
    for gens in candidates:
        if len(gens) != F.d:
            raise WrongReduction(f"proposal has {len(gens)} generators, expected {F.d}")
        for w, w0 in zip(gens, F.generators):
            if w.pres != L.lifted:
                raise UsageError("proposal is not over the lifted presentation")
            if L.reduce_form(w) != w0:
                raise WrongReduction(f"{w} does not reduce to {w0} mod {L.base.ring.p}")
        lifted_alpha = [[L.lift_form(a) for a in row] for row in F.alpha]
        try:
            D = check_integrability(L.lifted, gens, F.certificate, lifted_alpha)
            return SStructure(L, F, D, True)
        except NotIntegrable as exc:
            if first_obstruction is None:
                v = _form_valuation(exc.residual)
                first_obstruction = Obstruction(
                    f"lift is not integrable mod {L.lifted.ring.modulus}; residual has valuation {v}",
                    exc.residual,
                    v,
                )
            continue
        except UsageError:
            # the lifted base witness fails; fall back to the computed one
            D = check_integrability(L.lifted, gens, F.certificate)
            reduces = all(
                L.reduce_form(a) == a0 for row, row0 in zip(D.alpha, F.alpha) for a, a0 in zip(row, row0)
            )
            return SStructure(L, F, D, reduces)
    raise first_obstruction


def verify_c4(SS: SStructure, phi: InvariantPolynomial) -> ChainCertificate:
    """Bott vanishing over Z/p^n for the Bott connection of the lifted distribution."""
    D = SS.distribution
    phi = phi.with_ring(D.pres.ring) if phi.ring != D.pres.ring else phi
    if phi.weight <= D.d:
        raise HypothesisUnmet(f"weight q = {phi.weight} does not exceed the codimension d = {D.d}")
    conn = bott_connection(D).connection
    return verify_bott_vanishing(conn, D, phi)


def reduce_certificate(cert: ChainCertificate, base: VarietyPresentation) -> tuple[tuple[str, Form], ...]:
    return tuple((name, f.change_ring(base)) for name, f in cert.forms)


def certificates_agree_mod_p(SS: SStructure, phi: InvariantPolynomial) -> bool:
    """The c4 certificate reduced mod p equals the base Bott-vanishing certificate."""
    lifted = verify_c4(SS, phi)
    base_phi = phi.with_ring(SS.base.pres.ring)
    base = verify_bott_vanishing(bott_connection(SS.base).connection, SS.base, base_phi)
    return reduce_certificate(lifted, SS.base.pres) == base.forms


def crystalline_residue(
    SS: SStructure,
    X: VarietyPresentation,
    h: Mapping[Exp, int],
    global_connection: Connection,
    phi: InvariantPolynomial,
) -> ResidueClass:
    """Residue cocycle over Z/p^n built from the Bott connection of the S-structure on U."""
    D = SS.distribution
    phi = phi.with_ring(D.pres.ring) if phi.ring != D.pres.ring else phi
    provenance = tuple(("S-structure generator", str(w)) for w in D.generators)
    return residue(X, h, D, global_connection, phi, provenance=provenance)


def compare_s_structures(r1: ResidueClass, r2: ResidueClass) -> DifferenceClass:
    return difference_class(r1, r2)
