"""Connections on free modules, Chern–Weil forms, transgression and residues.

Conventions: a connection is ``d + A`` acting on column vectors, its
curvature ``K = dA + A ∧ A``; ``c_i`` is the i-th coefficient of
``det(1 + tK)``, the sum of the principal i×i minors of K (entries are
2-forms, which commute, so minors are unambiguous). An invariant polynomial
φ in ``X_1..X_m`` has weight ``q`` with ``X_i`` of weight i; ``φ(c)`` is a
2q-form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations, permutations
from typing import Mapping, Optional, Sequence

from .derham import Inconclusive, SupportedComplex, TruncationError, degree_bound, supported_complex
from .forms import Form, d
from .foliation import (
    Distribution,
    FiltrationLevel,
    InternalInconsistency,
    bott_connection,
    filtration_level,
    project_leafwise,
    recompose,
)
from .poly import Exp, Terms, VarietyPresentation, padd, pmul
from .syntax import format_invariant, parse_invariant_terms
from .zmod import RingDescriptor, UsageError


class HypothesisUnmet(Exception):
    """The theorem being certified does not apply to the given data."""


class SmallCharacteristic(HypothesisUnmet):
    """Transgression needs ``1/k`` for ``k <= 2q``, i.e. ``p > 2q``."""


Matrix2 = tuple[tuple[Form, ...], ...]


def _matrix(rows) -> Matrix2:
    return tuple(tuple(r) for r in rows)


def mat_wedge(A: Matrix2, B: Matrix2, pres: VarietyPresentation) -> Matrix2:
    n, k, m = len(A), len(B), len(B[0]) if B else 0
    zero = Form.zero(pres)
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = zero
            for t in range(k):
                if A[i][t] and B[t][j]:
                    acc = acc + A[i][t].wedge(B[t][j])
            row.append(acc)
        out.append(row)
    return _matrix(out)


def mat_add(A: Matrix2, B: Matrix2, scale: int = 1) -> Matrix2:
    return _matrix([[a + (b if scale == 1 else b.scale(scale)) for a, b in zip(ra, rb)] for ra, rb in zip(A, B)])


def mat_d(A: Matrix2) -> Matrix2:
    return _matrix([[d(a) for a in row] for row in A])


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = list(perm)
    for i in range(len(seen)):
        for j in range(i + 1, len(seen)):
            if seen[i] > seen[j]:
                sign = -sign
    return sign


@dataclass(frozen=True)
class Connection:
    """``d + A`` on the free module of rank ``m``; ``A`` is an m×m matrix of 1-forms."""

    pres: VarietyPresentation
    A: Matrix2

    def __post_init__(self):
        A = _matrix(self.A)
        object.__setattr__(self, "A", A)
        m = len(A)
        if any(len(row) != m for row in A):
            raise UsageError("connection matrix must be square")
        for row in A:
            for a in row:
                if not isinstance(a, Form) or a.pres != self.pres:
                    raise UsageError("connection entries must be forms over the presentation")
                if a.degrees() - {1}:
                    raise UsageError(f"connection entry {a} is not a 1-form")

    @classmethod
    def trivial(cls, pres: VarietyPresentation, m: int) -> "Connection":
        return cls(pres, _matrix([[Form.zero(pres)] * m for _ in range(m)]))

    @property
    def rank(self) -> int:
        return len(self.A)

    def curvature(self) -> Matrix2:
        return _curvature(self)

    def restrict(self, target: VarietyPresentation, h_extra=None) -> "Connection":
        return Connection(target, _matrix([[a.restrict(target, h_extra) for a in row] for row in self.A]))

    def change_ring(self, target: VarietyPresentation) -> "Connection":
        return Connection(target, _matrix([[a.change_ring(target) for a in row] for row in self.A]))

    def __str__(self) -> str:
        return "[" + "; ".join(", ".join(str(a) for a in row) for row in self.A) + "]"


_CURVATURE_CACHE: dict = {}


def _curvature(conn: Connection) -> Matrix2:
    key = (conn.pres, conn.A)
    K = _CURVATURE_CACHE.get(key)
    if K is None:
        K = mat_add(mat_d(conn.A), mat_wedge(conn.A, conn.A, conn.pres))
        if len(_CURVATURE_CACHE) > 512:
            _CURVATURE_CACHE.clear()
        _CURVATURE_CACHE[key] = K
    return K


def curvature(conn: Connection) -> Matrix2:
    """``K = dA + A ∧ A``, checked against Bianchi ``dK = K ∧ A - A ∧ K``."""
    K = conn.curvature()
    bianchi = mat_add(mat_wedge(K, conn.A, conn.pres), mat_wedge(conn.A, K, conn.pres), -1)
    if mat_d(K) != bianchi:
        raise InternalInconsistency("Bianchi identity failed")
    return K


def principal_minor_sum(K: Matrix2, i: int, pres: VarietyPresentation) -> Form:
    """Sum of principal i×i minors of a matrix of even forms."""
    m = len(K)
    if i == 0:
        return Form.function(pres.const(1))
    total = Form.zero(pres)
    for S in combinations(range(m), i):
        for perm in permutations(S):
            prod = Form.function(pres.const(1))
            for s, t in zip(S, perm):
                entry = K[s][t]
                if not entry:
                    prod = None
                    break
                prod = prod.wedge(entry)
            if prod is None or not prod:
                continue
            total = total + (prod if _perm_sign([S.index(t) for t in perm]) > 0 else -prod)
    return total


@dataclass(frozen=True)
class ChernForm:
    index: int
    form: Form
    closed: bool
    convention: str = "det(1 + tK)"


def chern_form(conn: Connection, i: int) -> ChernForm:
    K = conn.curvature()
    if i < 0:
        raise UsageError("Chern index must be >= 0")
    c = principal_minor_sum(K, i, conn.pres) if i <= conn.rank else Form.zero(conn.pres)
    if d(c):
        raise InternalInconsistency(f"c_{i} is not closed")
    return ChernForm(i, c, True)


def chern_forms(conn: Connection) -> list[Form]:
    """``[c_0, c_1, ..., c_m]``."""
    return [chern_form(conn, i).form for i in range(conn.rank + 1)]


# ---------------------------------------------------------------------------
# invariant polynomials


class NotHomogeneous(UsageError):
    pass


@dataclass(frozen=True)
class InvariantPolynomial:
    """``φ = Σ c_e X^e`` with ``X_i`` of weight i."""

    ring: RingDescriptor
    terms: tuple[tuple[tuple[int, ...], int], ...]

    @classmethod
    def create(cls, ring: RingDescriptor, terms: Mapping[tuple[int, ...], int]) -> "InvariantPolynomial":
        N = ring.modulus
        clean = {}
        k = max((len(e) for e in terms), default=0)
        for e, c in terms.items():
            e = tuple(e) + (0,) * (k - len(e))
            if any(x < 0 for x in e):
                raise UsageError("negative exponent in invariant polynomial")
            clean[e] = (clean.get(e, 0) + c) % N
        clean = {e: c for e, c in clean.items() if c}
        if not clean:
            raise UsageError("invariant polynomial is zero")
        # drop trailing unused variables
        k = max(max((i + 1 for i, x in enumerate(e) if x), default=0) for e in clean)
        clean = {e[:k]: c for e, c in clean.items()}
        return cls(ring, tuple(sorted(clean.items())))

    @classmethod
    def parse(cls, ring: RingDescriptor, text: str) -> "InvariantPolynomial":
        return cls.create(ring, parse_invariant_terms(text, ring.modulus))

    @property
    def nvars(self) -> int:
        return max((len(e) for e, _ in self.terms), default=0)

    @staticmethod
    def _weight(e) -> int:
        return sum((i + 1) * x for i, x in enumerate(e))

    def is_homogeneous(self) -> bool:
        return len({self._weight(e) for e, _ in self.terms}) == 1

    @property
    def weight(self) -> int:
        ws = {self._weight(e) for e, _ in self.terms}
        if len(ws) != 1:
            raise NotHomogeneous(f"{self} is not homogeneous (weights {sorted(ws)})")
        return ws.pop()

    q = weight

    def monomials(self):
        return list(self.terms)

    def __str__(self) -> str:
        return format_invariant(dict(self.terms), self.ring)

    def with_ring(self, ring: RingDescriptor) -> "InvariantPolynomial":
        return InvariantPolynomial.create(ring, dict(self.terms))

    def entry_polynomial(self, m: int) -> Terms:
        """φ(c_1(E)..c_m(E)) as a polynomial in the m² entries ``e_ij`` (index ``i*m + j``)."""
        N = self.ring.modulus
        zero = (0,) * (m * m)
        cs: list[Terms] = [{zero: 1}]
        for i in range(1, m + 1):
            ci: Terms = {}
            for S in combinations(range(m), i):
                for perm in permutations(S):
                    e = [0] * (m * m)
                    for s, t in zip(S, perm):
                        e[s * m + t] += 1
                    sign = _perm_sign([S.index(t) for t in perm])
                    ci = padd(ci, {tuple(e): 1}, N, sign)
            cs.append(ci)
        out: Terms = {}
        for e, c in self.terms:
            if any(x and i + 1 > m for i, x in enumerate(e)):
                continue
            term: Terms = {zero: c}
            for i, x in enumerate(e):
                for _ in range(x):
                    term = pmul(term, cs[i + 1], N)
            out = padd(out, term, N)
        return out


def evaluate_on_chern(phi: InvariantPolynomial, cs: Sequence[Form], pres: VarietyPresentation) -> Form:
    total = Form.zero(pres)
    one = Form.function(pres.const(1))
    for e, coeff in phi.terms:
        prod = one
        for i, x in enumerate(e):
            c = cs[i + 1] if i + 1 < len(cs) else Form.zero(pres)
            for _ in range(x):
                prod = prod.wedge(c)
                if not prod:
                    break
            if not prod:
                break
        if prod:
            total = total + prod.scale(coeff)
    return total


def evaluate_entry_polynomial(P: Terms, K: Matrix2, pres: VarietyPresentation) -> Form:
    m = len(K)
    flat = [K[i][j] for i in range(m) for j in range(m)]
    one = Form.function(pres.const(1))
    powers: dict = {}

    def power(idx, k):
        key = (idx, k)
        if key not in powers:
            powers[key] = one if k == 0 else power(idx, k - 1).wedge(flat[idx])
        return powers[key]

    total = Form.zero(pres)
    for e, c in P.items():
        prod = one
        for idx, k in enumerate(e):
            if k:
                prod = prod.wedge(power(idx, k))
                if not prod:
                    break
        if prod:
            total = total + prod.scale(c)
    return total


def _check_phi(conn: Connection, phi: InvariantPolynomial) -> int:
    if phi.ring != conn.pres.ring:
        raise UsageError("φ and the connection live over different rings")
    return phi.weight


def phi_form(conn: Connection, phi: InvariantPolynomial) -> Form:
    """φ(c_1..c_m) as a closed 2q-form."""
    _check_phi(conn, phi)
    out = evaluate_on_chern(phi, chern_forms(conn), conn.pres)
    if d(out):
        raise InternalInconsistency("φ-form is not closed")
    return out


def phi_form_from_entries(conn: Connection, phi: InvariantPolynomial) -> Form:
    """Second route: the entry polynomial of φ evaluated on K."""
    _check_phi(conn, phi)
    return evaluate_entry_polynomial(phi.entry_polynomial(conn.rank), conn.curvature(), conn.pres)


# ---------------------------------------------------------------------------
# flatness and vanishing


@dataclass(frozen=True)
class Flatness:
    """Filtration levels of each curvature entry; flat along F iff all lie in F^{-1}."""

    levels: tuple[tuple[FiltrationLevel, ...], ...]
    curvature: Matrix2

    @property
    def ok(self) -> bool:
        return all(lv.contains(1) for row in self.levels for lv in row)

    def __bool__(self) -> bool:
        return self.ok

    def offending(self) -> list[tuple[int, int, Form]]:
        return [
            (i, j, self.curvature[i][j])
            for i, row in enumerate(self.levels)
            for j, lv in enumerate(row)
            if not lv.contains(1)
        ]


def is_flat_along(conn: Connection, F: Distribution) -> Flatness:
    if conn.pres != F.pres:
        raise UsageError("connection and distribution live on different presentations")
    K = curvature(conn)
    levels = tuple(tuple(filtration_level(k, F) for k in row) for row in K)
    return Flatness(levels, K)


@dataclass(frozen=True)
class ChainCertificate:
    """A chain-level identity with the witnesses needed to re-check it."""

    kind: str
    statement: str
    forms: tuple[tuple[str, Form], ...]
    levels: tuple[tuple[str, FiltrationLevel], ...] = ()
    details: tuple[tuple[str, object], ...] = ()


def _require_flat(conn: Connection, F: Distribution) -> Flatness:
    flat = is_flat_along(conn, F)
    if not flat:
        bad = ", ".join(f"K[{i}][{j}] = {k}" for i, j, k in flat.offending())
        raise HypothesisUnmet(f"connection is not flat along the foliation ({bad} not in F^-1)")
    return flat


def verify_theorem_t1(conn: Connection, F: Distribution, i: int) -> ChainCertificate:
    """``c_i`` lies in ``F^{-i}``, so its image in the foliated complex is the zero cochain."""
    if i < 1:
        raise UsageError("Chern index must be >= 1")
    _require_flat(conn, F)
    c = chern_form(conn, i).form
    level = filtration_level(c, F)
    if not level.contains(min(i, F.d + 1)) or project_leafwise(c, F):
        raise InternalInconsistency(f"c_{i} of a flat-along-F connection is not in F^-{i}")
    return ChainCertificate(
        kind="t1",
        statement=f"c_{i} lies in F^-{i} and maps to the zero cochain of the foliated complex",
        forms=((f"c_{i}", c), ("foliated image", Form.zero(F.pres))),
        levels=((f"c_{i}", level),),
        details=(("index", i), ("level", level.level)),
    )


def verify_bott_vanishing(conn: Connection, F: Distribution, phi: InvariantPolynomial) -> ChainCertificate:
    """For ``q > d``: every monomial of φ(c) lies in ``F^{-q} = 0``, so φ(c) is the zero form."""
    q = _check_phi(conn, phi)
    if q <= F.d:
        raise HypothesisUnmet(f"weight q = {q} does not exceed the codimension d = {F.d}")
    _require_flat(conn, F)
    cs = chern_forms(conn)
    levels = []
    for i in range(1, len(cs)):
        lv = filtration_level(cs[i], F)
        if not lv.contains(min(i, F.d + 1)):
            raise InternalInconsistency(f"c_{i} is not in F^-{i}")
        levels.append((f"c_{i}", lv))
    value = evaluate_on_chern(phi, cs, conn.pres)
    if value:
        raise InternalInconsistency("Bott vanishing failed at chain level")
    bounds = tuple((str(InvariantPolynomial.create(phi.ring, {e: 1})), phi._weight(e)) for e, _ in phi.terms)
    return ChainCertificate(
        kind="bott",
        statement=f"phi(c) = 0 exactly: each monomial lies in F^-{q} and F^-{F.d + 1} = 0",
        forms=(("phi_form", value),) + tuple((name, cs[k + 1]) for k, (name, _) in enumerate(levels)),
        levels=tuple(levels),
        details=(("q", q), ("d", F.d), ("monomial levels", bounds)),
    )


def recheck_levels(cert: ChainCertificate, F: Distribution) -> bool:
    """Re-verify decompositions ``c = Σ ω_L ∧ η_L`` with ``|L| >= i`` by form arithmetic."""
    forms = dict(cert.forms)
    for name, lv in cert.levels:
        i = int(name.split("_")[1])
        if recompose(F, lv) != forms[name]:
            return False
        if any(len(L) < min(i, F.d + 1) for L, _ in lv.decomposition):
            return False
    return True


# ---------------------------------------------------------------------------
# transgression


def _tpoly_mul(a: list[Form], b: list[Form], pres) -> list[Form]:
    out = [Form.zero(pres) for _ in range(len(a) + len(b) - 1)]
    for i, x in enumerate(a):
        if not x:
            continue
        for j, y in enumerate(b):
            if y:
                out[i + j] = out[i + j] + x.wedge(y)
    return out


def _partial(P: Terms, idx: int, N: int) -> Terms:
    out: Terms = {}
    for e, c in P.items():
        k = e[idx]
        if k:
            f = list(e)
            f[idx] -= 1
            v = c * k % N
            if v:
                out[tuple(f)] = (out.get(tuple(f), 0) + v) % N
    return {e: c for e, c in out.items() if c}


def transgression(conn0: Connection, conn1: Connection, phi: InvariantPolynomial) -> Form:
    """Chern–Simons form T with ``dT = φ(∇_1) - φ(∇_0)``.

    Path ``A_t = A_0 + tη``; ``K_t = K_0 + t(dη + A_0η + ηA_0) + t²η∧η`` and
    ``T = ∫_0^1 Σ_ij ∂P/∂e_ij(K_t) ∧ η_ij dt`` with P the entry polynomial of φ.
    """
    if conn0.pres != conn1.pres or conn0.rank != conn1.rank:
        raise UsageError("connections must share presentation and rank")
    q = _check_phi(conn0, phi)
    pres = conn0.pres
    ring = pres.ring
    if ring.p <= 2 * q:
        raise SmallCharacteristic(f"transgression needs p > 2q = {2 * q}, got p = {ring.p}")
    m = conn0.rank
    eta = mat_add(conn1.A, conn0.A, -1)
    T = Form.zero(pres)
    if all(not e for row in eta for e in row):
        return T
    A0 = conn0.A
    K0 = conn0.curvature()
    lin = mat_add(mat_d(eta), mat_add(mat_wedge(A0, eta, pres), mat_wedge(eta, A0, pres)))
    quad = mat_wedge(eta, eta, pres)
    entries = [[K0[i][j], lin[i][j], quad[i][j]] for i in range(m) for j in range(m)]
    P = phi.entry_polynomial(m)
    N = ring.modulus
    one = [Form.function(pres.const(1))]
    powers: dict = {}

    def power(idx, k):
        key = (idx, k)
        if key not in powers:
            powers[key] = one if k == 0 else _tpoly_mul(power(idx, k - 1), entries[idx], pres)
        return powers[key]

    for i in range(m):
        for j in range(m):
            e_ij = eta[i][j]
            if not e_ij:
                continue
            G = _partial(P, i * m + j, N)
            acc: list[Form] = [Form.zero(pres)]
            for e, c in G.items():
                prod = one
                for idx, k in enumerate(e):
                    if k:
                        prod = _tpoly_mul(prod, power(idx, k), pres)
                scaled = [f.scale(c) for f in prod]
                if len(scaled) > len(acc):
                    acc += [Form.zero(pres)] * (len(scaled) - len(acc))
                for k, f in enumerate(scaled):
                    acc[k] = acc[k] + f
            integral = Form.zero(pres)
            for k, f in enumerate(acc):
                if f:
                    integral = integral + f.scale(ring.inverse(k + 1))
            T = T + integral.wedge(e_ij)
    delta = phi_form(conn1, phi) - phi_form(conn0, phi)
    if d(T) != delta:
        raise InternalInconsistency("dT != φ(∇_1) - φ(∇_0)")
    return T


# ---------------------------------------------------------------------------
# residues


@dataclass(frozen=True)
class ResidueClass:
    """Fiber cocycle ``(a, b)`` of degree 2q: ``da = 0`` and ``a|_U = db``."""

    a: Form
    b: Form
    degree: int
    phi: InvariantPolynomial
    h: tuple
    global_connection: Connection
    adapted_connection: Connection
    provenance: tuple[tuple[str, str], ...] = ()

    def fiber_differential(self) -> tuple[Form, Form]:
        U = self.b.pres
        return d(self.a), self.a.restrict(U, dict(self.h)) - d(self.b)

    @property
    def fiber_closed(self) -> bool:
        da, rest = self.fiber_differential()
        return not da and not rest

    def is_zero(self) -> bool:
        return not self.a and not self.b


def residue(
    X: VarietyPresentation,
    h: Mapping[Exp, int],
    F_U: Distribution,
    global_connection: Connection,
    phi: InvariantPolynomial,
    adapted: Optional[Connection] = None,
    provenance: Sequence[tuple[str, str]] = (),
) -> ResidueClass:
    """The residue cocycle of φ for a foliation defined on ``U = X_h``.

    ``a = φ(∇_global)`` and ``b`` the transgression from the adapted connection
    (default: Bott connection of ``F_U``) to ``∇_global|_U``; since φ of the
    adapted connection is exactly zero, ``a|_U = db``.
    """
    h = dict(h)
    U = X.localize(h)
    if U == X:
        h = {X.zero_exp: 1}
    if F_U.pres != U:
        raise UsageError("the foliation must live on the open U = X_h")
    if global_connection.pres != X:
        raise UsageError("the global connection must live on X")
    q = _check_phi(global_connection, phi)
    if q <= F_U.d:
        raise HypothesisUnmet(f"weight q = {q} does not exceed the codimension d = {F_U.d}")
    if U.ring.p <= 2 * q:
        raise SmallCharacteristic(f"residues need p > 2q = {2 * q}, got p = {U.ring.p}")
    if adapted is None:
        adapted = bott_connection(F_U).connection
    if adapted.rank != global_connection.rank:
        raise UsageError(
            f"adapted connection has rank {adapted.rank}, global connection rank {global_connection.rank}"
        )
    verify_bott_vanishing(adapted, F_U, phi)
    a = phi_form(global_connection, phi)
    restricted = global_connection.restrict(U, h)
    b = transgression(adapted, restricted, phi)
    res = ResidueClass(a, b, 2 * q, phi, tuple(sorted(h.items())), global_connection, adapted, tuple(provenance))
    if not res.fiber_closed:
        raise InternalInconsistency("residue pair is not fiber-closed")
    return res


@dataclass(frozen=True)
class DifferenceClass:
    """``(a_1 - a_2, b_1 - b_2)`` for two residue cocycles and whether it is exact.

    ``status``: ``"zero"`` (identical cocycles), ``"exact"`` (with primitive),
    or ``"inconclusive"`` (no primitive inside the truncation N).
    """

    a: Form
    b: Form
    status: str
    primitive: Optional[tuple[Form, Form]]
    N: Optional[int]
    pole_order: Optional[int]


def difference_class(r1: ResidueClass, r2: ResidueClass, max_extra: int = 2) -> DifferenceClass:
    """Compare two residue cocycles in the truncated supported complex."""
    if r1.a.pres != r2.a.pres or r1.b.pres != r2.b.pres or r1.h != r2.h:
        raise UsageError("residues live on different varieties")
    a = r1.a - r2.a
    b = r1.b - r2.b
    if not a and not b:
        return DifferenceClass(a, b, "zero", (Form.zero(a.pres), Form.zero(b.pres)), None, None)
    X = a.pres
    U = b.pres
    base_N = max(x for x in (degree_bound(a), degree_bound(b), 0) if x is not None)
    pole = max((c.m for c in b.terms.values()), default=0)
    jb = r1.degree - 1
    pole_order = max(pole - jb, 0) if U.localized else None
    last = None
    for N in range(base_N, base_N + max_extra + 1):
        S: SupportedComplex = supported_complex(X, dict(r1.h), N, pole_order)
        try:
            found = S.find_primitive(r1.degree, a, b)
        except TruncationError:
            continue
        last = (N, found)
        if not isinstance(found, Inconclusive):
            a2, b2 = found
            da, rest = S.fiber_differential(a2, b2)
            if da != a or rest != b:
                raise InternalInconsistency("difference primitive fails its check")
            return DifferenceClass(a, b, "exact", (a2, b2), N, pole_order)
    N = last[0] if last else None
    return DifferenceClass(a, b, "inconclusive", None, N, pole_order)
