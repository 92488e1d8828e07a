"""Shared builders and brute-force oracles for the tests."""

from __future__ import annotations

import itertools
import random
from functools import lru_cache

from hypothesis import strategies as st

from folcris.forms import Form
from folcris.poly import LocalizedPoly, VarietyPresentation
from folcris.syntax import parse_form, parse_plain_poly
from folcris.zmod import RingDescriptor

RINGS = [(5, 1), (7, 1), (3, 2), (5, 2)]


@lru_cache(maxsize=None)
def presentation(p: int, n: int, vars: str, inverted: str | None = None) -> VarietyPresentation:
    ring = RingDescriptor(p, n)
    h = parse_plain_poly(ring, list(vars), inverted) if inverted else None
    return VarietyPresentation.create(ring, list(vars), h)


def form(pres, text: str) -> Form:
    return parse_form(pres, text)


def random_poly(pres, rng: random.Random, degree: int = 3, terms: int = 3) -> LocalizedPoly:
    N = pres.ring.modulus
    num = {}
    for _ in range(rng.randrange(terms + 1)):
        e = [0] * pres.nvars
        for _ in range(rng.randrange(degree + 1)):
            e[rng.randrange(pres.nvars)] += 1
        num[tuple(e)] = rng.randrange(N)
    m = rng.randrange(3) if pres.localized else 0
    return LocalizedPoly(pres, num, m)


def random_form(pres, rng: random.Random, degree: int | None = None, pieces: int = 3) -> Form:
    out = Form.zero(pres)
    v = pres.nvars
    for _ in range(rng.randrange(1, pieces + 1)):
        j = rng.randrange(v + 1) if degree is None else degree
        idx = tuple(sorted(rng.sample(range(v), j)))
        out = out + Form.dx(pres, *idx).scale(random_poly(pres, rng))
    return out


@st.composite
def forms(draw, pres, degree=None):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_form(pres, random.Random(seed), degree)


def all_vectors(ring: RingDescriptor, k: int):
    return itertools.product(range(ring.modulus), repeat=k)


def apply(M, x, N):
    return tuple(sum(M[i][j] * x[j] for j in range(len(x))) % N for i in range(len(M)))


@lru_cache(maxsize=None)
def _vector_table(N: int, k: int):
    import numpy as np

    return np.array(list(itertools.product(range(N), repeat=k)), dtype=np.int64).reshape(-1, k)


def _images(M, ring, cols):
    import numpy as np

    V = _vector_table(ring.modulus, cols)
    return V, (V @ np.array(M, dtype=np.int64).T) % ring.modulus


def brute_kernel(M, ring, cols):
    V, MV = _images(M, ring, cols)
    return {tuple(int(a) for a in v) for v, w in zip(V, MV) if not w.any()}


def brute_image(M, ring, cols):
    _, MV = _images(M, ring, cols)
    return {tuple(int(a) for a in w) for w in MV}


def span(cols, ring, length):
    """All Z/p^n combinations of column vectors."""
    N = ring.modulus
    out = {tuple([0] * length)}
    for c in cols:
        out = {tuple((a + k * b) % N for a, b in zip(v, c)) for v in out for k in range(N)}
    return out


def p_torsion_profile(K: set, I: set, ring) -> list[int]:
    """#{x + I in K/I : p^k x in I} for k = 1..n; determines K/I up to isomorphism."""
    N = ring.modulus
    out = []
    for k in range(1, ring.n + 1):
        pk = ring.p**k
        hits = sum(1 for x in K if tuple(pk * a % N for a in x) in I)
        out.append(hits // len(I))
    return out


def profile_of(exponents, ring) -> list[int]:
    out = []
    for k in range(1, ring.n + 1):
        total = 1
        for e in exponents:
            total *= ring.p ** min(e, k)
        out.append(total)
    return out


# ---------------------------------------------------------------------------
# linear algebra oracle


def _column_set(M):
    return [tuple(M.col(j)) for j in range(M.cols)]


def check_matrix_against_brute(rows, ring) -> list[str]:
    """Compare kernel / solve / homology_at on one small matrix with enumeration."""
    from folcris.zmod import LinearSystem, Matrix, homology_at, kernel

    problems = []
    r, c = len(rows), len(rows[0])
    N = ring.modulus
    M = Matrix(ring, rows)
    ker = brute_kernel(rows, ring, c)
    img = brute_image(rows, ring, c)
    if span(_column_set(kernel(M)), ring, c) != ker:
        problems.append(f"kernel of {rows}")
    system = LinearSystem(M)
    for b in all_vectors(ring, r):
        residual, negx = system.reduce(list(b))
        if b in img:
            x = [(-v) % N for v in negx]
            if any(residual) or apply(rows, x, N) != b:
                problems.append(f"solve {rows} x = {b}")
        elif not any(residual):
            problems.append(f"inconsistent {rows} x = {b} not detected")
    zero_out = Matrix.zeros(ring, 1, r)
    cases = [
        (M, zero_out, set(all_vectors(ring, r)), img),
        (Matrix.zeros(ring, c, 1), M, ker, {tuple([0] * c)}),
    ]
    kl = sorted(ker)
    if len(kl) > 1:
        cols = [kl[1], kl[len(kl) // 2]]
        d_in = Matrix(ring, [[cols[0][i], cols[1][i]] for i in range(c)])
        cases.append((d_in, M, ker, span(cols, ring, c)))
    for d_in, d_out, K, I in cases:
        dec = homology_at(d_in, d_out)
        if profile_of([e for e, _ in dec.summands], ring) != p_torsion_profile(K, I, ring):
            problems.append(f"homology structure for d_in={d_in.tolist()} d_out={d_out.tolist()}")
            continue
        for e, g in dec.summands:
            if g not in K:
                problems.append(f"generator {g} not a cycle")
            if tuple(ring.p**e * a % N for a in g) not in I:
                problems.append(f"generator {g} order exceeds p^{e}")
            if tuple(ring.p ** (e - 1) * a % N for a in g) in I:
                problems.append(f"generator {g} order below p^{e}")
    return problems


def exhaustive_linear_algebra(ring, shapes=((1, 1), (1, 2), (2, 1), (2, 2))) -> tuple[int, list[str]]:
    count = 0
    problems = []
    N = ring.modulus
    for r, c in shapes:
        for entries in itertools.product(range(N), repeat=r * c):
            rows = [list(entries[i * c:(i + 1) * c]) for i in range(r)]
            problems += check_matrix_against_brute(rows, ring)
            count += 1
    return count, problems


def random_invertible(ring, k: int, rng: random.Random):
    """Product of unit lower and upper triangular matrices with unit diagonals."""
    from folcris.zmod import Matrix

    N = ring.modulus
    units = [u for u in range(1, N) if u % ring.p]
    L = [[(rng.randrange(N) if i > j else (rng.choice(units) if i == j else 0)) for j in range(k)] for i in range(k)]
    U = [[(rng.randrange(N) if i < j else (1 if i == j else 0)) for j in range(k)] for i in range(k)]
    return Matrix(ring, L) @ Matrix(ring, U)


def construct_then_solve(ring, rng: random.Random, k: int = 4) -> list[str]:
    """``M = P diag(s) Q`` with known invariant factors; checks solve, NoSolution and cokernel."""
    from folcris.zmod import LinearSystem, Matrix, NoSolution, homology_at, kernel

    problems = []
    N = ring.modulus
    diag = [ring.p ** rng.randrange(ring.n + 1) for _ in range(k)]
    diag = [0 if s == N else s for s in diag]
    P, Q = random_invertible(ring, k, rng), random_invertible(ring, k, rng)
    D = Matrix(ring, [[diag[i] if i == j else 0 for j in range(k)] for i in range(k)])
    M = P @ D @ Q
    system = LinearSystem(M)
    x = [rng.randrange(N) for _ in range(k)]
    b = M.apply(x)
    try:
        y = system.solve(b)
        if M.apply(y) != b:
            problems.append("solve returned a wrong solution")
    except NoSolution:
        problems.append("consistent system reported unsolvable")
    K = kernel(M)
    if not (M @ K).is_zero():
        problems.append("kernel column not annihilated")
    for i, s in enumerate(diag):
        if ring.valuation(s) >= 1:
            e = [0] * k
            e[i] = 1
            target = P.apply(e)
            try:
                system.solve(target)
                problems.append(f"P e_{i} outside the image was solved")
            except NoSolution:
                pass
    coker = homology_at(M, Matrix.zeros(ring, 1, k))
    expected = sorted(ring.valuation(s) for s in diag)
    expected = [e for e in expected if e > 0]
    got = sorted(e for e, _ in coker.summands)
    if got != expected:
        problems.append(f"cokernel exponents {got} != {expected}")
    return problems


# ---------------------------------------------------------------------------
# cohomology oracles


def one_variable_oracle(C) -> list[list[int]]:
    """Summand exponents of H^0, H^1 for a one-variable (possibly x-localized) truncation.

    The differential is diagonal on monomials, d x^k = k x^(k-1) dx, so each
    monomial contributes independently; exponents are read off valuations.
    """
    ring = C.ring
    n = ring.n

    def exponent(f):
        (e, _), = f.num.items()
        return e[0] - f.m

    def monomials(j):
        out = []
        for i in range(C.rank(j)):
            a = C.basis_form(j, i)
            (coeff,) = a.terms.values()
            out.append(exponent(coeff))
        return out

    S0, S1 = set(monomials(0)), set(monomials(1))
    h0, h1 = [], []
    for k in S0:
        if k == 0:
            h0.append(n)
        else:
            v = min(ring.valuation(k % ring.modulus), n)
            if v:
                h0.append(v)
    for k in S1:
        if k + 1 == 0 or k + 1 not in S0:
            h1.append(n)
        else:
            v = min(ring.valuation((k + 1) % ring.modulus), n)
            if v:
                h1.append(v)
    return [sorted(h0), sorted(h1)]


def polynomial_derham_dims(p: int, nvars: int, N: int) -> list[int]:
    """dim H^j of the degree-N truncated de Rham complex of F_p[x_1..x_v], via sympy ranks over GF(p)."""
    from sympy.polys.domains import GF
    from sympy.polys.matrices import DomainMatrix

    def monos(bound):
        return [e for e in itertools.product(range(bound + 1), repeat=nvars) if sum(e) <= bound]

    bases = []
    for j in range(nvars + 1):
        bases.append([(I, e) for I in itertools.combinations(range(nvars), j) for e in monos(N - j)])
    ranks = []
    for j in range(nvars):
        index = {b: i for i, b in enumerate(bases[j + 1])}
        rows = [[0] * len(bases[j]) for _ in bases[j + 1]]
        for col, (I, e) in enumerate(bases[j]):
            for i in range(nvars):
                if e[i] == 0 or i in I:
                    continue
                sign = (-1) ** sum(1 for t in I if t < i)
                J = tuple(sorted(I + (i,)))
                f = list(e)
                f[i] -= 1
                rows[index[(J, tuple(f))]][col] = (rows[index[(J, tuple(f))]][col] + sign * e[i]) % p
        M = DomainMatrix([[GF(p)(v) for v in r] for r in rows], (len(rows), len(bases[j])), GF(p))
        ranks.append(M.rank())
    dims = []
    for j in range(nvars + 1):
        out_rank = ranks[j] if j < nvars else 0
        in_rank = ranks[j - 1] if j >= 1 else 0
        dims.append(len(bases[j]) - out_rank - in_rank)
    return dims


def dy_foliated_oracle(p: int, N: int):
    """Foliated complex of D = <dy> on A^2 over F_p: d = d/dx on f and f dx.

    Returns (H^0 monomials, H^1 monomials) as exponent pairs.
    """
    h0 = [(a, b) for a in range(N + 1) for b in range(N + 1 - a) if a % p == 0]
    h1 = [(a, b) for a in range(N) for b in range(N - a) if (a + 1) % p == 0]
    return h0, h1


def gallery_distribution(name: str):
    """Distribution of a named gallery foliation, on its open locus when it has one."""
    from folcris.foliation import check_integrability
    from folcris.gallery import FOLIATIONS

    p, vars, gens, locus = FOLIATIONS[name]
    pres = presentation(p, 1, vars, locus)
    return check_integrability(pres, [form(pres, g) for g in gens])


def in_filtration_by_wedges(a: Form, generators, k: int) -> bool:
    """a ∈ F^{-k} iff a ∧ ω_M = 0 for every (d-k+1)-subset M of pointwise independent generators."""
    d_ = len(generators)
    if k <= 0:
        return True
    size = d_ - k + 1
    if size <= 0:
        return not a
    for M in itertools.combinations(generators, size):
        prod = a
        for w in M:
            prod = prod.wedge(w)
        if prod:
            return False
    return True
