"""Exact arithmetic and normal-form linear algebra over Z/p^n.

Matrices are small dense integer arrays. Entries are kept reduced in
``[0, p^n)``; numpy ``int64`` storage is used whenever every product of two
entries fits in a machine word, and Python integers (``object`` arrays)
otherwise.

Pivoting is deterministic everywhere: smallest p-adic valuation first, then
lowest column index, then lowest row index.
"""

from __future__ import annotations

from functools import cached_property
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

_INT64_SAFE = 2**62


class UsageError(ValueError):
    """Malformed call: shape mismatch, ring mismatch, bad parameters."""


class ComplexNotValid(ValueError):
    """Raised when consecutive differentials do not compose to zero."""


def is_prime(k: int) -> bool:
    if k < 2:
        return False
    if k % 2 == 0:
        return k == 2
    f = 3
    while f * f <= k:
        if k % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class RingDescriptor:
    """The coefficient ring Z/p^n with p an odd prime."""

    p: int
    n: int = 1

    def __post_init__(self):
        if not isinstance(self.p, int) or not is_prime(self.p):
            raise UsageError(f"p = {self.p!r} is not a prime")
        if self.p == 2:
            raise UsageError("p = 2 is not supported (odd characteristic only)")
        if not isinstance(self.n, int) or self.n < 1:
            raise UsageError(f"exponent n = {self.n!r} must be >= 1")
        if self.p**self.n >= 2**63:
            raise UsageError(f"modulus {self.p}^{self.n} does not fit in 63 bits")

    @cached_property
    def modulus(self) -> int:
        return self.p**self.n

    @cached_property
    def dtype(self):
        return np.int64 if self.modulus**2 < _INT64_SAFE else object

    def __str__(self) -> str:
        return f"Z/{self.p}^{self.n}" if self.n > 1 else f"F_{self.p}"

    def reduce(self, x: int) -> int:
        return int(x) % self.modulus

    def signed(self, x: int) -> int:
        """Representative in (-N/2, N/2]; used for printing."""
        x %= self.modulus
        return x - self.modulus if x > self.modulus // 2 else x

    def valuation(self, x: int) -> int:
        x %= self.modulus
        if x == 0:
            return self.n
        v = 0
        while x % self.p == 0:
            x //= self.p
            v += 1
        return v

    def is_unit(self, x: int) -> bool:
        return int(x) % self.p != 0

    def inverse(self, x: int) -> int:
        if not self.is_unit(x):
            raise ZeroDivisionError(f"{x} is not a unit in {self}")
        return pow(int(x) % self.modulus, -1, self.modulus)

    def split(self, x: int) -> tuple[int, int]:
        """Write x = p^v * u with u a unit; returns (v, u). For x = 0: (n, 1)."""
        x %= self.modulus
        if x == 0:
            return self.n, 1
        v = 0
        while x % self.p == 0:
            x //= self.p
            v += 1
        return v, x % self.modulus

    def element(self, value: int) -> "RingElement":
        return RingElement(self, value % self.modulus)

    def reduction(self, n: int = 1) -> "RingDescriptor":
        return RingDescriptor(self.p, n)


@dataclass(frozen=True)
class RingElement:
    ring: RingDescriptor
    value: int

    def __post_init__(self):
        object.__setattr__(self, "value", self.value % self.ring.modulus)

    def _coerce(self, other) -> int:
        if isinstance(other, RingElement):
            if other.ring != self.ring:
                raise UsageError("ring mismatch")
            return other.value
        return int(other)

    def __add__(self, other):
        return RingElement(self.ring, self.value + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return RingElement(self.ring, self.value - self._coerce(other))

    def __rsub__(self, other):
        return RingElement(self.ring, self._coerce(other) - self.value)

    def __mul__(self, other):
        return RingElement(self.ring, self.value * self._coerce(other))

    __rmul__ = __mul__

    def __neg__(self):
        return RingElement(self.ring, -self.value)

    def __int__(self):
        return self.value

    @property
    def valuation(self) -> int:
        return self.ring.valuation(self.value)

    @property
    def is_unit(self) -> bool:
        return self.ring.is_unit(self.value)

    def inverse(self) -> "RingElement":
        return RingElement(self.ring, self.ring.inverse(self.value))


class Matrix:
    """Dense matrix over a single :class:`RingDescriptor`. Treated as immutable."""

    __slots__ = ("ring", "data")

    def __init__(self, ring: RingDescriptor, data):
        rows = [[int(v) % ring.modulus for v in row] for row in data]
        arr = np.array(rows, dtype=object)
        if arr.ndim != 2:
            raise UsageError("matrix data must be two-dimensional")
        self.ring = ring
        self.data = arr.astype(ring.dtype) if arr.size else np.zeros(arr.shape, dtype=ring.dtype)
        self.data.setflags(write=False)

    @classmethod
    def _wrap(cls, ring: RingDescriptor, arr: np.ndarray) -> "Matrix":
        m = object.__new__(cls)
        m.ring = ring
        m.data = np.array(arr, dtype=ring.dtype) % ring.modulus
        m.data.setflags(write=False)
        return m

    @classmethod
    def zeros(cls, ring: RingDescriptor, rows: int, cols: int) -> "Matrix":
        return cls._wrap(ring, np.zeros((rows, cols), dtype=ring.dtype))

    @classmethod
    def identity(cls, ring: RingDescriptor, size: int) -> "Matrix":
        return cls._wrap(ring, np.eye(size, dtype=np.int64).astype(ring.dtype))

    @classmethod
    def column(cls, ring: RingDescriptor, values: Sequence[int]) -> "Matrix":
        return cls(ring, [[v] for v in values]) if len(values) else cls.zeros(ring, 0, 1)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def tolist(self) -> list[list[int]]:
        return [[int(v) for v in row] for row in self.data]

    def col(self, j: int) -> list[int]:
        return [int(v) for v in self.data[:, j]]

    def __getitem__(self, ij):
        return int(self.data[ij])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Matrix)
            and self.ring == other.ring
            and self.shape == other.shape
            and bool(np.array_equal(self.data, other.data))
        )

    def __hash__(self):
        return hash((self.ring, self.shape, tuple(int(v) for v in self.data.ravel())))

    def __repr__(self) -> str:
        return f"Matrix({self.ring}, {self.tolist()})"

    def __add__(self, other: "Matrix") -> "Matrix":
        _check_same(self, other)
        return Matrix._wrap(self.ring, self.data + other.data)

    def __sub__(self, other: "Matrix") -> "Matrix":
        _check_same(self, other)
        return Matrix._wrap(self.ring, self.data - other.data)

    def __neg__(self) -> "Matrix":
        return Matrix._wrap(self.ring, -self.data)

    def scale(self, c: int) -> "Matrix":
        return Matrix._wrap(self.ring, self.data * (int(c) % self.ring.modulus))

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.ring != other.ring:
            raise UsageError("ring mismatch")
        if self.cols != other.rows:
            raise UsageError(f"shape mismatch {self.shape} @ {other.shape}")
        return Matrix._wrap(self.ring, _matmul(self.ring, self.data, other.data))

    def apply(self, vec: Sequence[int]) -> list[int]:
        if len(vec) != self.cols:
            raise UsageError(f"vector of length {len(vec)} for {self.shape} matrix")
        v = np.array([int(x) % self.ring.modulus for x in vec], dtype=self.ring.dtype).reshape(-1, 1)
        return [int(x) for x in _matmul(self.ring, self.data, v).ravel()]

    @property
    def T(self) -> "Matrix":
        return Matrix._wrap(self.ring, self.data.T)

    def hstack(self, other: "Matrix") -> "Matrix":
        return Matrix._wrap(self.ring, np.hstack([self.data, other.data]))

    def vstack(self, other: "Matrix") -> "Matrix":
        return Matrix._wrap(self.ring, np.vstack([self.data, other.data]))

    def is_zero(self) -> bool:
        return not bool(np.any(self.data))


def _check_same(a: Matrix, b: Matrix):
    if a.ring != b.ring or a.shape != b.shape:
        raise UsageError("matrix ring/shape mismatch")


def _matmul(ring: RingDescriptor, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    N = ring.modulus
    inner = a.shape[1]
    if ring.dtype is np.int64 and inner * (N - 1) ** 2 < _INT64_SAFE:
        return (a.astype(np.int64) @ b.astype(np.int64)) % N
    return (a.astype(object) @ b.astype(object)) % N if inner else np.zeros((a.shape[0], b.shape[1]), dtype=object)


# ---------------------------------------------------------------------------
# Howell form


def _column_valuations(ring: RingDescriptor, col: np.ndarray) -> np.ndarray:
    """p-adic valuations of a column (n for zero entries)."""
    nz = col != 0
    vals = np.where(nz, 0, ring.n).astype(np.int64)
    for k in range(1, ring.n):
        vals[nz & ((col % ring.p**k) == 0)] = k
    return vals


class _RowReducer:
    """Row-operation workspace shared by the Howell and kernel routines."""

    def __init__(self, ring: RingDescriptor, A: np.ndarray, track: bool):
        self.ring = ring
        self.A = np.array(A, dtype=ring.dtype) % ring.modulus
        self.U = np.eye(self.A.shape[0], dtype=np.int64).astype(ring.dtype) if track else None

    def _ops(self):
        return (self.A,) if self.U is None else (self.A, self.U)

    def swap(self, i: int, j: int):
        if i != j:
            for M in self._ops():
                M[[i, j]] = M[[j, i]]

    def scale(self, i: int, u: int):
        N = self.ring.modulus
        for M in self._ops():
            M[i] = (M[i] * u) % N

    def eliminate(self, target: np.ndarray, source: int, q: np.ndarray):
        """Row_t -= q_t * Row_source for every index t in ``target``."""
        N = self.ring.modulus
        for M in self._ops():
            M[target] = (M[target] - np.outer(q, M[source])) % N

    def add_multiple(self, dest: int, source: int, c: int):
        N = self.ring.modulus
        for M in self._ops():
            M[dest] = (M[dest] + c * M[source]) % N

    def grow(self):
        dt = self.ring.dtype
        self.A = np.vstack([self.A, np.zeros((1, self.A.shape[1]), dtype=dt)])
        if self.U is not None:
            r = self.U.shape[0]
            U = np.zeros((r + 1, r + 1), dtype=dt)
            U[:r, :r] = self.U
            U[r, r] = 1
            self.U = U


def _howell(ring: RingDescriptor, A: np.ndarray, ncols: int | None = None, track: bool = False):
    """Row-reduce ``A`` to Howell form on its first ``ncols`` columns.

    Row operations act on every column, so trailing columns carry along
    bookkeeping (as in the kernel construction). Returns the reducer and the
    pivot list ``[(row, col, k)]`` where the pivot entry equals p^k.
    """
    p, n, N = ring.p, ring.n, ring.modulus
    red = _RowReducer(ring, A, track)
    ncols = red.A.shape[1] if ncols is None else ncols
    pivots: list[tuple[int, int, int]] = []
    r = 0
    for c in range(ncols):
        col = red.A[r:, c]
        if col.size == 0 or not np.any(col):
            continue
        vals = _column_valuations(ring, col)
        best = int(np.argmin(vals))  # first occurrence: lowest row
        k = int(vals[best])
        red.swap(r, r + best)
        _, u = ring.split(int(red.A[r, c]))
        red.scale(r, ring.inverse(u))
        pk = p**k
        below = np.nonzero(red.A[r + 1 :, c])[0] + r + 1
        if below.size:
            q = np.array([int(x) // pk for x in red.A[below, c]], dtype=ring.dtype)
            red.eliminate(below, r, q)
        if k > 0:
            extra = (red.A[r] * p ** (n - k)) % N
            if np.any(extra[:ncols]):
                zero_rows = [i for i in range(r + 1, red.A.shape[0]) if not np.any(red.A[i, :ncols])]
                if not zero_rows:
                    red.grow()
                    z = red.A.shape[0] - 1
                else:
                    z = zero_rows[0]
                red.add_multiple(z, r, p ** (n - k))
        pivots.append((r, c, k))
        r += 1
    for t, c, k in pivots:
        pk = p**k
        above = [s for s in range(t) if int(red.A[s, c]) >= pk]
        if above:
            q = np.array([int(red.A[s, c]) // pk for s in above], dtype=ring.dtype)
            red.eliminate(np.array(above), t, q)
    return red, pivots


def howell_form(M: Matrix) -> tuple[Matrix, Matrix]:
    """Howell normal form of the row span of ``M``.

    Returns ``(H, U)`` with ``U`` invertible and ``U @ M_pad == H``, where
    ``M_pad`` is ``M`` followed by ``H.rows - M.rows`` zero rows (extra rows
    are only added when the Howell property needs room that the existing rows
    cannot provide). Nonzero rows of ``H`` come first, pivots are powers of
    p, entries above a pivot p^k lie in ``[0, p^k)``.
    """
    red, _ = _howell(M.ring, M.data, track=True)
    return Matrix._wrap(M.ring, red.A), Matrix._wrap(M.ring, red.U)


def howell_rows(M: Matrix) -> Matrix:
    """The nonzero rows of the Howell form: the canonical row-span basis."""
    red, piv = _howell(M.ring, M.data)
    return Matrix._wrap(M.ring, red.A[: len(piv)])


def pad_rows(M: Matrix, rows: int) -> Matrix:
    if rows < M.rows:
        raise UsageError("cannot pad to fewer rows")
    return M.vstack(Matrix.zeros(M.ring, rows - M.rows, M.cols))


def kernel(M: Matrix) -> Matrix:
    """Columns generating ``{x : M x = 0}``; shape ``M.cols x s``."""
    ring = M.ring
    r, c = M.shape
    B = np.hstack([M.data.T, np.eye(c, dtype=np.int64).astype(ring.dtype)])
    red, piv = _howell(ring, B, ncols=r + c)
    gens = [red.A[i, r:] for i in range(len(piv)) if not np.any(red.A[i, :r])]
    if not gens:
        return Matrix.zeros(ring, c, 0)
    return Matrix._wrap(ring, np.array(gens, dtype=ring.dtype).T)


_SMALL_SYSTEM = 48


class NoSolution(Exception):
    """``solve`` found the system inconsistent. ``residual`` is the Howell-reduced right-hand side."""

    def __init__(self, residual: list[int]):
        super().__init__("no solution")
        self.residual = residual


@dataclass
class LinearSystem:
    """Precomputed Howell data for repeated solves ``M x = b``."""

    M: Matrix
    _basis: np.ndarray = field(init=False, repr=False)
    _pivots: list = field(init=False, repr=False)
    _rows: Optional[list] = field(init=False, repr=False, default=None)

    def __post_init__(self):
        ring = self.M.ring
        r, c = self.M.shape
        B = np.hstack([self.M.data.T, np.eye(c, dtype=np.int64).astype(ring.dtype)])
        red, piv = _howell(ring, B, ncols=r)
        self._basis = red.A
        self._pivots = piv

    def reduce(self, b: Sequence[int]) -> tuple[list[int], list[int]]:
        """Reduce ``(b, 0)`` against the span of ``(Mx, x)``; returns (residual, -x)."""
        ring = self.M.ring
        r, c = self.M.shape
        if len(b) != r:
            raise UsageError(f"right-hand side has length {len(b)}, expected {r}")
        N = ring.modulus
        if r + c <= _SMALL_SYSTEM:
            return self._reduce_small([int(v) % N for v in b] + [0] * c, r, N)
        w = np.zeros(r + c, dtype=ring.dtype)
        w[:r] = [int(v) % N for v in b]
        for row, col, k in self._pivots:
            e = int(w[col])
            if e == 0:
                continue
            pk = ring.p**k
            q = e // pk
            if q:
                w = (w - q * self._basis[row]) % N
        return [int(v) for v in w[:r]], [int(v) for v in w[r:]]

    def _reduce_small(self, w: list[int], r: int, N: int) -> tuple[list[int], list[int]]:
        # plain-int loop; numpy call overhead dominates for short rows
        if self._rows is None:
            self._rows = [[int(v) for v in row] for row in self._basis]
        p = self.M.ring.p
        for row, col, k in self._pivots:
            e = w[col]
            if e == 0:
                continue
            q = e // p**k
            if q:
                w = [(a - q * b) % N for a, b in zip(w, self._rows[row])]
        return w[:r], w[r:]

    def solve(self, b: Sequence[int]) -> list[int]:
        residual, negx = self.reduce(b)
        if any(residual):
            raise NoSolution(residual)
        N = self.M.ring.modulus
        return [(-v) % N for v in negx]


def solve(M: Matrix, b: Sequence[int]) -> list[int]:
    """Some ``x`` with ``M x = b``; raises :class:`NoSolution` if none exists."""
    return LinearSystem(M).solve(b)


# ---------------------------------------------------------------------------
# Smith form and module decompositions


def _smith_rows(ring: RingDescriptor, R: np.ndarray) -> tuple[list[int], np.ndarray]:
    """Diagonalise ``R`` by row and column operations.

    Returns the diagonal exponents (``k`` for a pivot p^k, one per pivot, in
    order) and ``Uinv`` where ``U R V = diag`` for some invertible ``V``.
    """
    p, N = ring.p, ring.modulus
    A = np.array(R, dtype=ring.dtype) % N
    m = A.shape[0]
    Uinv = np.eye(m, dtype=np.int64).astype(ring.dtype)
    exps: list[int] = []
    t = 0
    while t < min(A.shape):
        sub = A[t:, t:]
        if not np.any(sub):
            break
        best = None
        for j in range(sub.shape[1]):
            col = sub[:, j]
            if not np.any(col):
                continue
            vals = _column_valuations(ring, col)
            i = int(np.argmin(vals))
            if best is None or vals[i] < best[0]:
                best = (int(vals[i]), i, j)
            if best[0] == 0:
                break
        k, i, j = best
        i += t
        j += t
        if i != t:
            A[[t, i]] = A[[i, t]]
            Uinv[:, [t, i]] = Uinv[:, [i, t]]
        if j != t:
            A[:, [t, j]] = A[:, [j, t]]
        _, u = ring.split(int(A[t, t]))
        uinv = ring.inverse(u)
        A[t] = (A[t] * uinv) % N
        Uinv[:, t] = (Uinv[:, t] * u) % N
        pk = p**k
        for s in range(t + 1, m):
            e = int(A[s, t])
            if e:
                q = e // pk
                A[s] = (A[s] - q * A[t]) % N
                Uinv[:, t] = (Uinv[:, t] + q * Uinv[:, s]) % N
        for s in range(t + 1, A.shape[1]):
            e = int(A[t, s])
            if e:
                q = e // pk
                A[:, s] = (A[:, s] - q * A[:, t]) % N
        exps.append(k)
        t += 1
    return exps, Uinv


@dataclass(frozen=True)
class ModuleDecomposition:
    """Invariant-factor form ``(Z/p^n)^free ⊕ ⊕ Z/p^e``.

    ``summands`` lists ``(exponent, generator)`` pairs: exponent ``n`` marks a
    free summand, ``1 <= e < n`` a torsion summand ``Z/p^e``. Generators are
    coordinate vectors in the ambient free module.
    """

    ring: RingDescriptor
    summands: tuple[tuple[int, tuple[int, ...]], ...]

    @property
    def free_rank(self) -> int:
        return sum(1 for e, _ in self.summands if e == self.ring.n)

    @property
    def torsion(self) -> tuple[int, ...]:
        return tuple(sorted(e for e, _ in self.summands if e < self.ring.n))

    @property
    def generators(self) -> list[tuple[int, ...]]:
        return [g for _, g in self.summands]

    @property
    def order(self) -> int:
        return self.ring.p ** sum(e for e, _ in self.summands)

    def is_zero(self) -> bool:
        return not self.summands

    def describe(self) -> str:
        parts = []
        if self.free_rank:
            parts.append(f"(Z/{self.ring.modulus})^{self.free_rank}" if self.free_rank > 1 else f"Z/{self.ring.modulus}")
        parts += [f"Z/{self.ring.p ** e}" for e in self.torsion]
        return " + ".join(parts) if parts else "0"


def _normalize_generator(ring: RingDescriptor, vec: np.ndarray) -> np.ndarray:
    nz = np.nonzero(vec)[0]
    if nz.size == 0:
        return vec
    _, u = ring.split(int(vec[nz[0]]))
    return (vec * ring.inverse(u)) % ring.modulus


def _leading_index(vec: Sequence[int]) -> int:
    return next((i for i, v in enumerate(vec) if v), len(vec))


def quotient(K: Matrix, I: Matrix) -> ModuleDecomposition:
    """Decompose ``span(K) / span(I)`` for column-generated ``span(I) ⊆ span(K)``."""
    ring = K.ring
    m, s = K.shape
    if I.rows != m:
        raise UsageError("ambient dimensions differ")
    if s == 0:
        return ModuleDecomposition(ring, ())
    system = LinearSystem(K)
    coords = []
    for j in range(I.cols):
        try:
            coords.append(system.solve(I.col(j)))
        except NoSolution:
            raise ComplexNotValid("image is not contained in the kernel") from None
    rel = kernel(K).data
    if coords:
        rel = np.hstack([rel, np.array(coords, dtype=ring.dtype).T]) if rel.size else np.array(coords, dtype=ring.dtype).T
    if rel.shape[1] == 0:
        rel = np.zeros((s, 0), dtype=ring.dtype)
    exps, Uinv = _smith_rows(ring, rel)
    image_system = LinearSystem(I) if I.cols else None
    summands = []
    for i in range(s):
        e = exps[i] if i < len(exps) else ring.n
        if e == 0:
            continue
        gen = _matmul(ring, K.data, Uinv[:, i : i + 1]).ravel()
        gen = _normalize_generator(ring, gen)
        if image_system is not None:
            # canonical representative modulo the image
            res, _ = image_system.reduce([int(v) for v in gen])
            gen = np.array(res, dtype=ring.dtype)
        summands.append((e, tuple(int(v) for v in gen)))
    summands.sort(key=lambda t: (-t[0], _leading_index(t[1])))
    return ModuleDecomposition(ring, tuple(summands))


def homology_at(d_in: Matrix, d_out: Matrix) -> ModuleDecomposition:
    """``ker(d_out) / im(d_in)`` in invariant-factor form with representative cocycles."""
    if d_in.ring != d_out.ring:
        raise UsageError("ring mismatch")
    if d_in.rows != d_out.cols:
        raise UsageError(f"incompatible shapes {d_out.shape} after {d_in.shape}")
    if not (d_out @ d_in).is_zero():
        raise ComplexNotValid("d_out @ d_in is nonzero")
    return quotient(kernel(d_out), d_in)


def span_contains(M: Matrix, vec: Sequence[int]) -> bool:
    """Whether ``vec`` lies in the column span of ``M``."""
    residual, _ = LinearSystem(M).reduce(vec)
    return not any(residual)


def is_invertible(M: Matrix) -> bool:
    """Square and invertible over Z/p^n, i.e. full rank after reduction mod p."""
    if M.rows != M.cols:
        return False
    residue = Matrix(RingDescriptor(M.ring.p, 1), M.tolist())
    return howell_rows(residue).rows == M.rows


def from_columns(ring: RingDescriptor, rows: int, cols: Iterable[Sequence[int]]) -> Matrix:
    cols = list(cols)
    if not cols:
        return Matrix.zeros(ring, rows, 0)
    return Matrix._wrap(ring, np.array(cols, dtype=object).T)
