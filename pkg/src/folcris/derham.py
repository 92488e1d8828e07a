"""Total-degree truncations of de Rham type complexes and their cohomology.

A truncated complex stores, per cohomological degree j, an ordered basis of
pairs ``(key, e)`` standing for ``x^e / h^{M_j} * frame(key)`` and the matrices
of the differential acting on column vectors. The frame is ``dx_I`` for the
full de Rham complex; foliated complexes and graded pieces use other frames
(see :mod:`folcris.foliation`) but share this container.

Localized basis: ``M_j = N + j`` and ``deg e <= N - j + M_j deg h``. Then
``d(g/h^M) = (dg h - M g dh)/h^{M+1}`` stays inside, so the truncation is a
subcomplex.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Hashable, Mapping, Optional, Sequence

from .forms import Form, d
from .poly import Exp, LocalizedPoly, VarietyPresentation, degree, monomials
from .zmod import (
    LinearSystem,
    Matrix,
    ModuleDecomposition,
    NoSolution,
    RingDescriptor,
    UsageError,
    from_columns,
    homology_at,
)

BasisElement = tuple[Hashable, Exp]


class TruncationError(UsageError):
    """A form (or the image of a basis form under d) lies outside the truncation."""


class NotACocycle(UsageError):
    """``find_primitive`` was handed a form with nonzero differential."""


@dataclass(frozen=True)
class Inconclusive:
    """No primitive inside the truncation; ``residual`` is the Howell-reduced target."""

    degree: int
    N: int
    residual: tuple[int, ...]

    def __bool__(self) -> bool:
        return False


def denominator_exponent(pres: VarietyPresentation, N: int, j: int, pole_order: Optional[int] = None) -> int:
    if not pres.localized:
        return 0
    return (N if pole_order is None else pole_order) + j


def numerator_bound(pres: VarietyPresentation, N: int, j: int, frame_degree: int, pole_order: Optional[int] = None) -> int:
    return N - frame_degree + denominator_exponent(pres, N, j, pole_order) * pres.h_degree


def coefficient_basis(
    pres: VarietyPresentation, N: int, j: int, frame_degree: int, pole_order: Optional[int] = None
) -> list[Exp]:
    bound = numerator_bound(pres, N, j, frame_degree, pole_order)
    return monomials(pres.nvars, bound) if bound >= 0 else []


@dataclass
class TruncatedComplex:
    """Finite free cochain complex ``C^0 -> C^1 -> ...`` over ``Z/p^n``.

    ``matrices[j]`` maps ``C^j`` to ``C^{j+1}`` (columns are images of basis
    vectors). ``keys_to_form`` turns a coefficient dictionary into a Form
    representative; ``form_to_keys`` goes back (raising TruncationError or
    returning None when not representable).
    """

    pres: VarietyPresentation
    N: int
    label: str
    bases: list[list[BasisElement]]
    denominators: list[int]
    matrices: list[Matrix]
    keys_to_form: Callable[[int, Mapping], Form] = field(repr=False)
    form_to_keys: Callable[[int, Form], Mapping] = field(repr=False)

    @property
    def ring(self) -> RingDescriptor:
        return self.pres.ring

    @property
    def top(self) -> int:
        return len(self.bases) - 1

    def rank(self, j: int) -> int:
        return len(self.bases[j]) if 0 <= j < len(self.bases) else 0

    @cached_property
    def _index(self) -> list[dict]:
        return [{b: i for i, b in enumerate(basis)} for basis in self.bases]

    def differential(self, j: int) -> Matrix:
        """``C^j -> C^{j+1}``, with zero maps outside the stored range."""
        if 0 <= j < len(self.matrices):
            return self.matrices[j]
        return Matrix.zeros(self.ring, self.rank(j + 1), self.rank(j))

    # coordinates
    def encode_terms(self, j: int, terms: Mapping[Hashable, LocalizedPoly]) -> list[int]:
        vec = [0] * self.rank(j)
        if not terms:
            return vec
        if not 0 <= j <= self.top:
            raise TruncationError(f"degree {j} outside the complex")
        M = self.denominators[j]
        index = self._index[j]
        N = self.ring.modulus
        for key, c in terms.items():
            if c.m > M:
                raise TruncationError(f"denominator exponent {c.m} exceeds {M} in degree {j}")
            for e, v in c.with_denominator(M).items():
                pos = index.get((key, e))
                if pos is None:
                    raise TruncationError(f"term {key}, x^{e} outside the truncation N={self.N}")
                vec[pos] = (vec[pos] + v) % N
        return vec

    def decode_terms(self, j: int, vec: Sequence[int]) -> dict:
        if not 0 <= j <= self.top:
            return {}
        grouped: dict[Hashable, dict] = {}
        for (key, e), v in zip(self.bases[j], vec):
            if v % self.ring.modulus:
                grouped.setdefault(key, {})[e] = int(v)
        M = self.denominators[j]
        out = {}
        for key, num in grouped.items():
            c = LocalizedPoly(self.pres, num, M)
            if c:
                out[key] = c
        return out

    def encode(self, j: int, a: Form) -> list[int]:
        return self.encode_terms(j, self.form_to_keys(j, a))

    def decode(self, j: int, vec: Sequence[int]) -> Form:
        return self.keys_to_form(j, self.decode_terms(j, vec))

    def basis_form(self, j: int, i: int) -> Form:
        key, e = self.bases[j][i]
        return self.keys_to_form(j, {key: LocalizedPoly(self.pres, {e: 1}, self.denominators[j])})

    # cohomology
    def verify(self) -> None:
        for j in range(len(self.matrices) - 1):
            if not (self.matrices[j + 1] @ self.matrices[j]).is_zero():
                from .zmod import ComplexNotValid

                raise ComplexNotValid(f"d^{j + 1} d^{j} != 0 in {self.label}")

    def cohomology(self, j: int) -> ModuleDecomposition:
        return homology_at(self.differential(j - 1), self.differential(j))

    def cohomology_report(self, j: int) -> "CohomologyReport":
        dec = self.cohomology(j)
        return CohomologyReport(
            label=self.label,
            degree=j,
            N=self.N,
            decomposition=dec,
            representatives=tuple(self.decode(j, g) for g in dec.generators),
        )


@dataclass(frozen=True)
class CohomologyReport:
    label: str
    degree: int
    N: int
    decomposition: ModuleDecomposition
    representatives: tuple[Form, ...]

    @property
    def free_rank(self) -> int:
        return self.decomposition.free_rank

    @property
    def torsion(self) -> tuple[int, ...]:
        return self.decomposition.torsion

    def orders(self) -> list[int]:
        """Order of the cyclic summand generated by each representative."""
        p = self.decomposition.ring.p
        return [p**e for e, _ in self.decomposition.summands]


def assemble(
    pres: VarietyPresentation,
    N: int,
    label: str,
    frames: Sequence[Sequence[tuple[Hashable, int]]],
    apply_d: Callable[[int, Hashable, LocalizedPoly], Mapping[Hashable, LocalizedPoly]],
    keys_to_form,
    form_to_keys,
    pole_order: Optional[int] = None,
) -> TruncatedComplex:
    """Build a truncated complex from frame keys per degree.

    ``frames[j]`` lists ``(key, frame_degree)`` where ``frame_degree`` is the
    polynomial weight of the frame element (1 per differential). ``apply_d``
    returns the coefficient dictionary of the differential of
    ``coefficient * frame(key)`` in degree ``j + 1``.
    """
    bases: list[list[BasisElement]] = []
    denominators = []
    for j, keys in enumerate(frames):
        M = denominator_exponent(pres, N, j, pole_order)
        denominators.append(M)
        basis = []
        for key, w in keys:
            basis.extend((key, e) for e in coefficient_basis(pres, N, j, w, pole_order))
        bases.append(basis)
    skeleton = TruncatedComplex(pres, N, label, bases, denominators, [], keys_to_form, form_to_keys)
    mats = []
    for j in range(len(bases) - 1):
        cols = []
        M = denominators[j]
        for key, e in bases[j]:
            image = apply_d(j, key, LocalizedPoly(pres, {e: 1}, M))
            try:
                cols.append(skeleton.encode_terms(j + 1, image))
            except TruncationError as exc:
                raise TruncationError(
                    f"the {label} differential leaves the degree-{N} truncation ({exc}); "
                    "the complex is not compatible with total-degree truncation"
                ) from None
        mats.append(from_columns(pres.ring, len(bases[j + 1]), cols))
    skeleton.matrices = mats
    return skeleton


def derham_complex(pres: VarietyPresentation, N: int, pole_order: Optional[int] = None) -> TruncatedComplex:
    """Total-degree truncation of the full de Rham complex.

    ``pole_order`` caps the h-adic pole in degree 0 (default N); degree j
    allows one more pole per degree, as d requires.
    """
    from itertools import combinations

    v = pres.nvars
    frames = [[(I, len(I)) for I in combinations(range(v), j)] for j in range(v + 1)]

    def apply_d(j, I, c):
        return d(Form._raw(pres, {I: c})).terms

    def keys_to_form(j, terms):
        return Form(pres, terms)

    def form_to_keys(j, a: Form):
        if a.degrees() - {j}:
            raise TruncationError(f"form of degree {sorted(a.degrees())} in degree {j}")
        return a.terms

    return assemble(pres, N, "de Rham", frames, apply_d, keys_to_form, form_to_keys, pole_order)


def truncate(
    pres: VarietyPresentation,
    N: int,
    quotient=None,
    filtration_level: Optional[int] = None,
) -> TruncatedComplex:
    """De Rham, foliated (``quotient``) or graded (``quotient`` and level) truncation."""
    if N < 0:
        raise UsageError("truncation bound must be >= 0")
    if quotient is None:
        if filtration_level is not None:
            raise UsageError("a filtration level needs a distribution")
        return derham_complex(pres, N)
    from .foliation import foliated_complex, graded_piece

    if filtration_level is None:
        return foliated_complex(quotient, N)
    return graded_piece(quotient, filtration_level, N)


def cohomology(C: TruncatedComplex, j: int) -> ModuleDecomposition:
    return C.cohomology(j)


def find_primitive(a: Form, C: TruncatedComplex, degree: Optional[int] = None):
    """``b`` with ``d b = a`` inside ``C``, or :class:`Inconclusive`.

    Closedness is checked in ``C`` itself (so foliated classes are tested with
    the foliated differential).
    """
    j = a.degree if degree is None else degree
    vec = C.encode(j, a)
    if any(C.differential(j).apply(vec)):
        raise NotACocycle(f"the form is not closed in {C.label}")
    if not any(vec):
        return C.decode(j - 1, [0] * C.rank(j - 1)) if j >= 1 else Form.zero(C.pres)
    if j == 0:
        return Inconclusive(0, C.N, tuple(vec))
    system = LinearSystem(C.differential(j - 1))
    try:
        x = system.solve(vec)
    except NoSolution as exc:
        return Inconclusive(j, C.N, tuple(exc.residual))
    return C.decode(j - 1, x)


# ---------------------------------------------------------------------------
# supported cohomology


@dataclass
class SupportedComplex:
    """Mapping fiber of restriction ``C(X) -> C(U)``: ``(a, b)`` with ``a ∈ C^j(X)``, ``b ∈ C^{j-1}(U)``.

    Differential ``(a, b) -> (da, a|_U - db)``; vectors are ``a``-coordinates
    followed by ``b``-coordinates.
    """

    X: TruncatedComplex
    U: TruncatedComplex
    h_extra: dict
    restriction: list[Matrix]
    matrices: list[Matrix]

    @property
    def ring(self) -> RingDescriptor:
        return self.X.ring

    @property
    def N(self) -> int:
        return self.X.N

    def rank(self, j: int) -> int:
        return self.X.rank(j) + self.U.rank(j - 1)

    def differential(self, j: int) -> Matrix:
        if 0 <= j < len(self.matrices):
            return self.matrices[j]
        return Matrix.zeros(self.ring, self.rank(j + 1), self.rank(j))

    def restrict(self, a: Form) -> Form:
        return a.restrict(self.U.pres, self.h_extra)

    def encode(self, j: int, a: Form, b: Form) -> list[int]:
        return self.X.encode(j, a) + self.U.encode(j - 1, b)

    def decode(self, j: int, vec: Sequence[int]) -> tuple[Form, Form]:
        r = self.X.rank(j)
        return self.X.decode(j, vec[:r]), (self.U.decode(j - 1, vec[r:]) if j >= 1 else Form.zero(self.U.pres))

    def fiber_differential(self, a: Form, b: Form) -> tuple[Form, Form]:
        """Form-level differential, independent of any truncation."""
        return d(a), self.restrict(a) - d(b)

    def projection(self, j: int) -> Matrix:
        """Chain map ``(a, b) -> a`` to ``C(X)``."""
        rx, ru = self.X.rank(j), self.U.rank(j - 1)
        rows = [[1 if c == r else 0 for c in range(rx)] + [0] * ru for r in range(rx)]
        return Matrix(self.ring, rows) if rx else Matrix.zeros(self.ring, 0, rx + ru)

    def inclusion(self, j: int) -> Matrix:
        """Chain map ``C^{j-1}(U) -> fiber^j``, ``b -> (0, b)`` (up to the sign convention ``-d``)."""
        rx, ru = self.X.rank(j), self.U.rank(j - 1)
        rows = [[0] * ru for _ in range(rx)] + [[1 if c == r else 0 for c in range(ru)] for r in range(ru)]
        return Matrix(self.ring, rows) if rx + ru else Matrix.zeros(self.ring, 0, ru)

    def cohomology(self, j: int) -> ModuleDecomposition:
        return homology_at(self.differential(j - 1), self.differential(j))

    def is_cocycle(self, j: int, a: Form, b: Form) -> bool:
        da, rest = self.fiber_differential(a, b)
        return not da and not rest

    def find_primitive(self, j: int, a: Form, b: Form):
        """``(a', b')`` with fiber differential ``(a, b)``, or Inconclusive."""
        if not self.is_cocycle(j, a, b):
            raise NotACocycle("pair is not fiber-closed")
        vec = self.encode(j, a, b)
        if not any(vec):
            return self.decode(j - 1, [0] * self.rank(j - 1))
        if j == 0:
            return Inconclusive(0, self.N, tuple(vec))
        try:
            x = LinearSystem(self.differential(j - 1)).solve(vec)
        except NoSolution as exc:
            return Inconclusive(j, self.N, tuple(exc.residual))
        return self.decode(j - 1, x)


def supported_complex(
    pres: VarietyPresentation, h: Mapping[Exp, int], N: int, pole_order: Optional[int] = None
) -> SupportedComplex:
    """Truncated fiber of restriction from ``X`` to ``U = X_h``.

    The pole order on ``U`` must dominate the one on ``X`` for restriction to
    land in the truncation; it defaults to N on both.
    """
    h = dict(h)
    U_pres = pres.localize(h)
    if U_pres.inverted == pres.inverted:
        h = {pres.zero_exp: 1}
    CX = derham_complex(pres, N, pole_order)
    CU = derham_complex(U_pres, N, pole_order)
    top = CX.top
    restriction = []
    for j in range(top + 1):
        cols = [CU.encode(j, CX.basis_form(j, i).restrict(U_pres, h)) for i in range(CX.rank(j))]
        restriction.append(from_columns(pres.ring, CU.rank(j), cols))
    mats = []
    for j in range(top + 1):
        # fiber^j = X^j + U^{j-1}  ->  fiber^{j+1} = X^{j+1} + U^j
        dX = CX.differential(j)
        R = restriction[j]
        dU = CU.differential(j - 1)
        upper = dX.hstack(Matrix.zeros(pres.ring, dX.rows, CU.rank(j - 1)))
        lower = R.hstack(-dU)
        mats.append(upper.vstack(lower))
    return SupportedComplex(CX, CU, h, restriction, mats)


def degree_bound(a: Form) -> Optional[int]:
    """Smallest N with ``a`` inside the de Rham truncation (None for zero)."""
    if not a.terms:
        return None
    pres = a.pres
    best = 0
    for I, c in a.terms.items():
        j = len(I)
        if not pres.localized:
            best = max(best, degree(c.num) + j)
            continue
        # need c.m <= N + j and deg(num) + (N + j - m) deg h <= N - j + (N + j) deg h
        dh = pres.h_degree
        need = max(c.m - j, degree(c.num) + j - c.m * dh)
        best = max(best, need)
    return best
