"""Integrable distributions, the foliated complex, Hodge filtration and Bott connection.

Everything is computed in a *completed frame*. For a distribution spanned by
``ω_0..ω_{d-1}`` with invertible minor ``W_J`` (rows: generators, columns:
the certificate subset J of frame indices), the 1-forms

    e_i = ω_i  (i < d),    e_{d+k} = θ_k = dx_{c_k}  (c_k the k-th index outside J)

form a basis of Ω¹, because ``dx_J = W_J^{-1} (ω - W_{Jc} dx_{Jc})``. A form
rewritten in this frame is a dictionary ``subset -> coefficient`` whose ω-part
(indices < d) counts its Hodge filtration level term by term.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Mapping, Optional, Sequence

from .derham import TruncatedComplex, TruncationError, assemble
from .forms import Form, add_terms, d, wedge_terms
from .poly import LocalizedPoly, VarietyPresentation, invert_unit, partial_derivative
from .zmod import UsageError

FrameTerms = dict


class NotTransversallySmooth(UsageError):
    """The certificate minor is not invertible over the algebra."""


class NotIntegrable(Exception):
    """``dω_i`` has a component outside ``D ∧ Ω¹``; ``residual`` holds it per generator."""

    def __init__(self, message: str, residual: Sequence[Form]):
        super().__init__(message)
        self.residual = tuple(residual)


class WitnessRejected(UsageError):
    """A supplied integrability witness does not satisfy ``dω_i = Σ α_ij ∧ ω_j``."""


class InternalInconsistency(AssertionError):
    """An identity that holds mathematically failed; indicates a bug."""


def determinant(M: Sequence[Sequence[LocalizedPoly]], one: LocalizedPoly) -> LocalizedPoly:
    """Laplace expansion along the first row (commutative entries)."""
    n = len(M)
    if n == 0:
        return one
    if n == 1:
        return M[0][0]
    total = one * 0
    for j in range(n):
        if not M[0][j]:
            continue
        minor = [row[:j] + row[j + 1 :] for row in M[1:]]
        term = M[0][j] * determinant(minor, one)
        total = total + term if j % 2 == 0 else total - term
    return total


def inverse_matrix(M: Sequence[Sequence[LocalizedPoly]], one: LocalizedPoly) -> list[list[LocalizedPoly]]:
    """Adjugate over determinant; ZeroDivisionError if the determinant is not a unit."""
    n = len(M)
    det_inv = invert_unit(determinant(M, one))
    if n == 1:
        return [[det_inv]]
    out = [[one * 0 for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:j] + row[j + 1 :] for k, row in enumerate(M) if k != i]
            cof = determinant(minor, one)
            if (i + j) % 2:
                cof = -cof
            out[j][i] = cof * det_inv
    return out


def coefficient_matrix(pres: VarietyPresentation, generators: Sequence[Form]) -> list[list[LocalizedPoly]]:
    zero = pres.const(0)
    return [[w.terms.get((j,), zero) for j in range(pres.nvars)] for w in generators]


@dataclass
class Frame:
    """Completed frame ``(ω_0..ω_{d-1}, dx_{c_0}, ...)`` for a given certificate."""

    pres: VarietyPresentation
    generators: tuple[Form, ...]
    J: tuple[int, ...]
    complement: tuple[int, ...] = field(init=False)
    dx_images: list[FrameTerms] = field(init=False, repr=False)

    def __post_init__(self):
        pres = self.pres
        d_ = len(self.generators)
        v = pres.nvars
        self.complement = tuple(i for i in range(v) if i not in self.J)
        W = coefficient_matrix(pres, self.generators)
        WJ = [[row[j] for j in self.J] for row in W]
        one = pres.const(1)
        try:
            WJinv = inverse_matrix(WJ, one) if d_ else []
        except ZeroDivisionError:
            raise NotTransversallySmooth(
                f"the minor on {self._names(self.J)} has non-invertible determinant "
                f"{determinant(WJ, one)}"
            ) from None
        images: list[FrameTerms] = [dict() for _ in range(v)]
        for k, c in enumerate(self.complement):
            images[c] = {(d_ + k,): one}
        for a, j in enumerate(self.J):
            terms: FrameTerms = {}
            for i in range(d_):
                if WJinv[a][i]:
                    terms[(i,)] = WJinv[a][i]
            for k, c in enumerate(self.complement):
                coeff = sum((WJinv[a][i] * W[i][c] for i in range(d_)), pres.const(0))
                if coeff:
                    terms[(d_ + k,)] = -coeff
            images[j] = terms
        self.dx_images = images
        self._subset_cache: dict = {(): {(): one}}
        self._back_cache: dict = {}

    def _names(self, idx) -> str:
        return "{" + ", ".join("d" + self.pres.vars[i] for i in idx) + "}"

    @property
    def d(self) -> int:
        return len(self.generators)

    @property
    def size(self) -> int:
        return self.pres.nvars

    def is_omega(self, idx: int) -> bool:
        return idx < self.d

    def omega_count(self, S: tuple[int, ...]) -> int:
        return sum(1 for s in S if s < self.d)

    def _expand_dx(self, I: tuple[int, ...]) -> FrameTerms:
        cached = self._subset_cache.get(I)
        if cached is None:
            cached = wedge_terms(self._expand_dx(I[:-1]), self.dx_images[I[-1]])
            self._subset_cache[I] = cached
        return cached

    def to_frame(self, a: Form) -> FrameTerms:
        out: FrameTerms = {}
        for I, c in a.terms.items():
            for S, e in self._expand_dx(I).items():
                v = e * c
                prev = out.get(S)
                out[S] = v if prev is None else prev + v
        return {S: c for S, c in out.items() if c}

    def element(self, idx: int) -> Form:
        if idx < self.d:
            return self.generators[idx]
        return Form.dx(self.pres, self.complement[idx - self.d])

    def _subset_form(self, S: tuple[int, ...]) -> Form:
        f = self._back_cache.get(S)
        if f is None:
            f = Form.function(self.pres.const(1))
            for s in S:
                f = f.wedge(self.element(s))
            self._back_cache[S] = f
        return f

    def from_frame(self, terms: Mapping[tuple[int, ...], LocalizedPoly]) -> Form:
        out = Form.zero(self.pres)
        for S, c in terms.items():
            out = out + self._subset_form(S).scale(c)
        return out

    def theta_part(self, terms: FrameTerms) -> FrameTerms:
        return {S: c for S, c in terms.items() if not S or S[0] >= self.d}

    def part_with_count(self, terms: FrameTerms, i: int) -> FrameTerms:
        return {S: c for S, c in terms.items() if self.omega_count(S) == i}


@dataclass
class Distribution:
    """``D = ⟨ω_0..ω_{d-1}⟩ ⊂ Ω¹`` with rank certificate J and witness α (``dω_i = Σ α_ij ∧ ω_j``)."""

    pres: VarietyPresentation
    generators: tuple[Form, ...]
    certificate: tuple[int, ...]
    alpha: tuple[tuple[Form, ...], ...]
    frame: Frame = field(repr=False, compare=False)

    @property
    def d(self) -> int:
        return len(self.generators)

    @property
    def rank(self) -> int:
        return self.d

    @property
    def leaf_dim(self) -> int:
        return self.pres.nvars - self.d

    def witness_residuals(self) -> list[Form]:
        return [
            d(w) - sum((self.alpha[i][j].wedge(self.generators[j]) for j in range(self.d)), Form.zero(self.pres))
            for i, w in enumerate(self.generators)
        ]

    def describe(self) -> str:
        gens = ", ".join(str(w) for w in self.generators) or "(none)"
        return f"D = <{gens}> on {self.pres.describe()}, J = {self.frame._names(self.certificate)}"

    def with_presentation(self, target: VarietyPresentation, h_extra=None) -> "Distribution":
        """Restriction to an open or change of coefficient ring, re-verified."""
        gens = [w.restrict(target, h_extra) for w in self.generators]
        alpha = [[a.restrict(target, h_extra) for a in row] for row in self.alpha]
        return check_integrability(target, gens, self.certificate, alpha)


def find_certificate(pres: VarietyPresentation, generators: Sequence[Form]) -> tuple[int, ...]:
    """First d-subset (lexicographic) whose minor is invertible."""
    d_ = len(generators)
    W = coefficient_matrix(pres, generators)
    one = pres.const(1)
    for J in combinations(range(pres.nvars), d_):
        det = determinant([[row[j] for j in J] for row in W], one)
        try:
            invert_unit(det)
        except ZeroDivisionError:
            continue
        return J
    raise NotTransversallySmooth("no coordinate minor of the generators is invertible")


def _validate_generators(pres, generators):
    gens = tuple(generators)
    for w in gens:
        if not isinstance(w, Form) or w.pres != pres:
            raise UsageError("generators must be forms over the given presentation")
        if w.degrees() - {1}:
            raise UsageError(f"generator {w} is not a 1-form")
    if len(gens) > pres.nvars:
        raise UsageError("more generators than variables")
    return gens


def compute_witness(frame: Frame) -> tuple[list[list[Form]], list[Form]]:
    """``(α, residual)``: α from the frame expansion of ``dω_i``, residual its θθ-part."""
    pres = frame.pres
    d_ = frame.d
    alpha_terms = [[{} for _ in range(d_)] for _ in range(d_)]
    residual = []
    for i, w in enumerate(frame.generators):
        rest = {}
        for S, c in frame.to_frame(d(w)).items():
            a, b = S
            if b < d_:
                # c ω_a ∧ ω_b = (c ω_a) ∧ ω_b
                alpha_terms[i][b] = add_terms(alpha_terms[i][b], {(a,): c})
            elif a < d_:
                # c ω_a ∧ θ = (-c θ) ∧ ω_a
                alpha_terms[i][a] = add_terms(alpha_terms[i][a], {(b,): -c})
            else:
                rest[S] = c
        residual.append(frame.from_frame(rest))
    alpha = [[frame.from_frame(t) for t in row] for row in alpha_terms]
    return alpha, residual


def check_integrability(
    pres: VarietyPresentation,
    generators: Sequence[Form],
    certificate: Optional[Sequence[int]] = None,
    alpha: Optional[Sequence[Sequence[Form]]] = None,
) -> Distribution:
    """Validate ``D`` and return it with a verified witness.

    Raises NotTransversallySmooth for a singular minor, NotIntegrable with the
    θθ-residual of ``dω_i`` (the part outside ``D ∧ Ω¹``), and WitnessRejected
    if a supplied α fails the identity.
    """
    gens = _validate_generators(pres, generators)
    if certificate is None:
        J = find_certificate(pres, gens) if gens else ()
    else:
        J = tuple(sorted(certificate))
        if len(J) != len(gens) or len(set(J)) != len(J) or any(not 0 <= j < pres.nvars for j in J):
            raise UsageError(f"certificate {tuple(certificate)} is not a {len(gens)}-subset of the variables")
    frame = Frame(pres, gens, J)
    computed, residual = compute_witness(frame)
    if any(residual):
        raise NotIntegrable("dω is not in D ∧ Ω¹", residual)
    if alpha is None:
        alpha = computed
    else:
        alpha = [list(row) for row in alpha]
        if len(alpha) != len(gens) or any(len(row) != len(gens) for row in alpha):
            raise UsageError("witness must be a d x d matrix of 1-forms")
    alpha_t = tuple(tuple(row) for row in alpha)
    D = Distribution(pres, gens, J, alpha_t, frame)
    bad = [i for i, r in enumerate(D.witness_residuals()) if r]
    if bad:
        if alpha is computed:
            raise InternalInconsistency("computed witness fails re-verification")
        raise WitnessRejected(f"supplied witness fails for generator(s) {bad}")
    return D


# ---------------------------------------------------------------------------
# filtration


@dataclass(frozen=True)
class FiltrationLevel:
    """``a = Σ_L ω_L ∧ η_L``; ``level`` is the least ``|L|`` (None for the zero form)."""

    level: Optional[int]
    decomposition: tuple[tuple[tuple[int, ...], Form], ...]

    def contains(self, i: int) -> bool:
        """Whether the form lies in ``F^{-i}``."""
        return self.level is None or self.level >= i


def filtration_level(a: Form, F: Distribution) -> FiltrationLevel:
    frame = F.frame
    groups: dict[tuple[int, ...], dict] = {}
    for S, c in frame.to_frame(a).items():
        k = frame.omega_count(S)
        groups.setdefault(S[:k], {})[S[k:]] = c
    if not groups:
        return FiltrationLevel(None, ())
    dec = tuple(
        (L, frame.from_frame(groups[L])) for L in sorted(groups, key=lambda L: (len(L), L))
    )
    return FiltrationLevel(min(len(L) for L in groups), dec)


def omega_product(F: Distribution, L: Sequence[int]) -> Form:
    out = Form.function(F.pres.const(1))
    for i in L:
        out = out.wedge(F.generators[i])
    return out


def recompose(F: Distribution, level: FiltrationLevel) -> Form:
    """Σ ω_L ∧ η_L from a decomposition (used to re-check witnesses)."""
    out = Form.zero(F.pres)
    for L, eta in level.decomposition:
        out = out + omega_product(F, L).wedge(eta)
    return out


def project_leafwise(a: Form, F: Distribution) -> Form:
    """Representative of the class of ``a`` in ``Ω / F^{-1}`` written in the dx_c, c ∉ J."""
    frame = F.frame
    return frame.from_frame(frame.theta_part(frame.to_frame(a)))


def foliated_d(a: Form, F: Distribution) -> Form:
    """Induced differential on ``Ω / (D ∧ Ω)`` (well defined because ``dD ⊂ D ∧ Ω¹``)."""
    return project_leafwise(d(a), F)


# ---------------------------------------------------------------------------
# complexes


def _theta_keys(F: Distribution, j: int):
    return list(combinations(range(F.leaf_dim), j))


def _shift(K, d_):
    return tuple(k + d_ for k in K)


def foliated_complex(F: Distribution, N: int) -> TruncatedComplex:
    """Truncation of ``Ω^*/(D ∧ Ω^{*-1})`` on the basis ``g/h^M θ_K``."""
    return graded_piece(F, 0, N, label="foliated")


def graded_piece(F: Distribution, i: int, N: int, route: str = "bott", label: Optional[str] = None) -> TruncatedComplex:
    """``F^{-i}/F^{-(i+1)}`` as foliated forms with values in ``Λ^i N*``.

    Indexed by foliated degree |K|; basis ``g/h^M ω_L ∧ θ_K`` with ``|L| = i``.
    ``route='bott'`` uses the Bott connection β on ``ω_L``; ``route='direct'``
    applies d to the form and keeps the terms with exactly i ω-factors.
    """
    if not 0 <= i <= F.d:
        raise UsageError(f"graded piece index {i} outside 0..{F.d}")
    if route not in ("bott", "direct"):
        raise UsageError(f"unknown route {route!r}")
    frame = F.frame
    pres = F.pres
    d_ = F.d
    Ls = list(combinations(range(d_), i))
    frames = [[((L, K), j) for L in Ls for K in _theta_keys(F, j)] for j in range(F.leaf_dim + 1)]
    sign = -1 if i % 2 else 1
    beta = bott_frame_terms(F)
    theta_dx = [frame.theta_part(frame.dx_images[x]) for x in range(pres.nvars)]

    def to_keys(terms: FrameTerms) -> dict:
        out = {}
        for S, c in terms.items():
            if frame.omega_count(S) != i:
                continue
            out[(S[:i], tuple(s - d_ for s in S[i:]))] = c
        return out

    def dfol_terms(c: LocalizedPoly, K) -> FrameTerms:
        dc: FrameTerms = {}
        for x in range(pres.nvars):
            px = partial_derivative(c, x)
            if px:
                dc = add_terms(dc, {S: v * px for S, v in theta_dx[x].items()})
        return wedge_terms(dc, {_shift(K, d_): pres.const(1)})

    def apply_bott(j, key, c):
        L, K = key
        total: FrameTerms = {}
        # d(ω_L) mod F^{-(i+1)}: replace ω_{l_r} by Σ_m β_{l_r m} ∧ ω_m
        for r, l in enumerate(L):
            piece: FrameTerms = {(): pres.const(1)}
            for s, l2 in enumerate(L):
                if s == r:
                    repl: FrameTerms = {}
                    for m in range(d_):
                        repl = add_terms(repl, wedge_terms(beta[l][m], {(m,): pres.const(1)}))
                    piece = wedge_terms(piece, repl)
                else:
                    piece = wedge_terms(piece, {(l2,): pres.const(1)})
            total = add_terms(total, piece, -1 if r % 2 else 1)
        total = wedge_terms(total, {_shift(K, d_): c})
        omega_L = {L: pres.const(1)}
        rest = wedge_terms(omega_L, dfol_terms(c, K))
        total = add_terms(total, rest, sign)
        return to_keys(total)

    def apply_direct(j, key, c):
        L, K = key
        a = omega_product(F, L).wedge(Form._raw(pres, {tuple(frame.complement[k] for k in K): c}))
        return to_keys(frame.to_frame(d(a)))

    def keys_to_form(j, terms):
        return frame.from_frame({L + _shift(K, d_): c for (L, K), c in terms.items()})

    def form_to_keys(j, a: Form):
        out = {}
        for S, c in frame.to_frame(a).items():
            k = frame.omega_count(S)
            if k < i:
                raise TruncationError(f"form is not in F^-{i}")
            if k > i:
                continue
            if len(S) - i != j:
                raise TruncationError(f"term of foliated degree {len(S) - i} in degree {j}")
            out[(S[:i], tuple(s - d_ for s in S[i:]))] = c
        return out

    apply_d = apply_bott if route == "bott" else apply_direct
    name = label or f"Gr^{i}"
    return assemble(pres, N, name, frames, apply_d, keys_to_form, form_to_keys)


# ---------------------------------------------------------------------------
# Bott connection


def bott_frame_terms(F: Distribution) -> list[list[FrameTerms]]:
    """``β_ij``: θ-part of ``α_ij`` in the completed frame."""
    frame = F.frame
    return [[frame.theta_part(frame.to_frame(a)) for a in row] for row in F.alpha]


@dataclass
class BottConnection:
    """Connection ``d + A`` on the free module with basis ``ω_i``, ``A = βᵀ``.

    ``beta[i][j]`` is the θ-part of ``α_ij``; ``curvature`` is
    ``dA + A ∧ A`` and ``levels`` certifies each entry lies in ``F^{-1}``.
    """

    distribution: Distribution
    beta: tuple[tuple[Form, ...], ...]
    connection: "object"
    curvature: tuple[tuple[Form, ...], ...]
    levels: tuple[tuple[FiltrationLevel, ...], ...]


def bott_connection(F: Distribution) -> BottConnection:
    from .chernweil import Connection

    frame = F.frame
    beta = tuple(tuple(frame.from_frame(t) for t in row) for row in bott_frame_terms(F))
    m = F.d
    A = tuple(tuple(beta[j][i] for j in range(m)) for i in range(m))
    conn = Connection(F.pres, A)
    K = conn.curvature()
    levels = tuple(tuple(filtration_level(K[i][j], F) for j in range(m)) for i in range(m))
    if not all(lv.contains(1) for row in levels for lv in row):
        raise InternalInconsistency("Bott curvature is not in F^-1")
    return BottConnection(F, beta, conn, K, levels)


# ---------------------------------------------------------------------------
# algebroid view


@dataclass(frozen=True)
class LeibnizCheck:
    identity: str
    holds: bool


@dataclass(frozen=True)
class LeibnizReport:
    checks: tuple[LeibnizCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.holds for c in self.checks)


def _sample_functions(F: Distribution, rng: random.Random, count: int) -> list[LocalizedPoly]:
    pres = F.pres
    out = [pres.var(i) for i in range(pres.nvars)]
    if pres.localized:
        out.append(pres.h_inverse(1))
    while len(out) < count:
        f = pres.const(rng.randrange(pres.ring.modulus))
        for _ in range(rng.randrange(1, 3)):
            f = f * pres.var(rng.randrange(pres.nvars)) + rng.randrange(pres.ring.modulus)
        if pres.localized and rng.random() < 0.3:
            f = f * pres.h_inverse(1)
        out.append(f)
    return out


def validate_algebroid(F: Distribution, samples: int = 6, seed: int = 0) -> LeibnizReport:
    """Check ``d_1(a m) = a d_1(m) + d_0(a) ∧ m`` and ``d_fol² = 0`` on a sample.

    ``d_0: A -> Ω¹/D`` and ``d_1`` is the induced differential on the quotient.
    """
    rng = random.Random(seed)
    pres = F.pres
    frame = F.frame
    funcs = _sample_functions(F, rng, samples)
    leaf_forms = [Form.dx(pres, c) for c in frame.complement]
    for f in funcs[: max(1, samples // 2)]:
        for c in frame.complement:
            leaf_forms.append(Form.dx(pres, c).scale(f))
    checks = []
    for a in funcs:
        fa = Form.function(a)
        d0a = foliated_d(fa, F)
        checks.append(LeibnizCheck(f"d_fol^2({a}) = 0", not foliated_d(d0a, F)))
        for m in leaf_forms:
            lhs = foliated_d(fa.wedge(m), F)
            rhs = project_leafwise(fa.wedge(foliated_d(m, F)) + d0a.wedge(m), F)
            checks.append(LeibnizCheck(f"d_1(({a}) * {m}) = a d_1(m) + d_0(a) m", lhs == rhs))
    for m in leaf_forms:
        checks.append(LeibnizCheck(f"d_fol^2({m}) = 0", not foliated_d(foliated_d(m, F), F)))
    report = LeibnizReport(tuple(checks))
    if not report.ok:
        raise InternalInconsistency("Leibniz identity failed: " + "; ".join(c.identity for c in checks if not c.holds))
    return report
