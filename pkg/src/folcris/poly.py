"""Sparse multivariate polynomials over Z/p^n, localized at one polynomial h.

Elements are fractions ``f / h^m`` kept in lowest terms: ``m`` is decreased
while ``h`` divides the numerator. Because ``h`` carries a unit leading
coefficient (graded-lex order) it is a nonzerodivisor, single-divisor
division by it is exact, and the reduced form is canonical.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Optional

from .zmod import RingDescriptor, UsageError

Exp = tuple[int, ...]
Terms = dict[Exp, int]


class PresentationRejected(UsageError):
    """The presentation violates a framedness or nonzerodivisor requirement."""


def grlex_key(e: Exp):
    return (sum(e), e)


def _clean(terms: Mapping[Exp, int], N: int) -> Terms:
    return {e: c % N for e, c in terms.items() if c % N}


def padd(a: Terms, b: Terms, N: int, scale: int = 1) -> Terms:
    out = dict(a)
    for e, c in b.items():
        v = (out.get(e, 0) + scale * c) % N
        if v:
            out[e] = v
        else:
            out.pop(e, None)
    return out


def pmul(a: Terms, b: Terms, N: int) -> Terms:
    out: Terms = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            e = tuple(x + y for x, y in zip(e1, e2))
            out[e] = (out.get(e, 0) + c1 * c2) % N
    return {e: c for e, c in out.items() if c}


def pscale(a: Terms, c: int, N: int) -> Terms:
    c %= N
    return {e: v * c % N for e, v in a.items() if v * c % N}


def pdiff(a: Terms, i: int, N: int) -> Terms:
    out: Terms = {}
    for e, c in a.items():
        if e[i]:
            v = c * e[i] % N
            if v:
                f = list(e)
                f[i] -= 1
                out[tuple(f)] = v
    return out


def leading(a: Terms) -> Exp:
    return max(a, key=grlex_key)


def degree(a: Terms) -> int:
    return max((sum(e) for e in a), default=-1)


def pdivmod(f: Terms, h: Terms, ring: RingDescriptor) -> tuple[Terms, Terms]:
    """Division by ``h`` (unit leading coefficient): ``f = q h + r``, no term of r divisible by LT(h)."""
    N = ring.modulus
    lt = leading(h)
    lc_inv = ring.inverse(h[lt])
    f = dict(f)
    q: Terms = {}
    r: Terms = {}
    while f:
        e = leading(f)
        c = f[e]
        if all(x >= y for x, y in zip(e, lt)):
            mon = tuple(x - y for x, y in zip(e, lt))
            coeff = c * lc_inv % N
            q[mon] = (q.get(mon, 0) + coeff) % N
            f = padd(f, {tuple(x + y for x, y in zip(mon, he)): hc for he, hc in h.items()}, N, -coeff)
        else:
            r[e] = c
            del f[e]
    return {e: c for e, c in q.items() if c}, r


@dataclass(frozen=True)
class PresentationCertificate:
    leading_coefficient: Optional[int]
    leading_monomial: Optional[Exp]
    order: str = "grlex"


@dataclass(frozen=True)
class VarietyPresentation:
    """``Z/p^n[x_1..x_v]`` localized at ``inverted`` (or not localized).

    ``inverted`` is stored as a sorted tuple of ``(exponent, coefficient)``
    pairs so that presentations are hashable and compare by value.
    """

    ring: RingDescriptor
    vars: tuple[str, ...]
    inverted: Optional[tuple[tuple[Exp, int], ...]] = None

    @classmethod
    def create(cls, ring: RingDescriptor, vars: Iterable[str], inverted: Optional[Mapping[Exp, int]] = None):
        vars = tuple(vars)
        inv = None
        if inverted is not None:
            terms = _clean(inverted, ring.modulus)
            if not terms:
                raise PresentationRejected("inverted polynomial is zero")
            inv = tuple(sorted(terms.items()))
        pres = cls(ring, vars, inv)
        check_presentation(pres)
        return pres._trivialize()

    def _trivialize(self) -> "VarietyPresentation":
        # inverting a unit constant changes nothing
        if self.inverted is not None and degree(self.h_terms) == 0:
            return VarietyPresentation(self.ring, self.vars, None)
        return self

    @property
    def nvars(self) -> int:
        return len(self.vars)

    @property
    def localized(self) -> bool:
        return self.inverted is not None

    @property
    def h_terms(self) -> Terms:
        return dict(self.inverted) if self.inverted is not None else {self.zero_exp: 1}

    @property
    def h_degree(self) -> int:
        return degree(self.h_terms) if self.localized else 0

    @property
    def zero_exp(self) -> Exp:
        return tuple(0 for _ in self.vars)

    def h_power(self, k: int) -> Terms:
        return _h_power(self, k)

    def with_ring(self, ring: RingDescriptor) -> "VarietyPresentation":
        """Same variables and coefficient-wise image of h over another ring."""
        inv = None
        if self.inverted is not None:
            inv = tuple((e, c % ring.modulus) for e, c in self.inverted if c % ring.modulus)
        return VarietyPresentation(ring, self.vars, inv)

    def localize(self, h: Terms) -> "VarietyPresentation":
        """The principal open ``U = X_h``; inverts ``inverted * h``."""
        h = _clean(h, self.ring.modulus)
        if not h:
            raise PresentationRejected("cannot localize at zero")
        lt = leading(h)
        if not self.ring.is_unit(h[lt]):
            raise PresentationRejected(f"leading coefficient {h[lt]} of the open-locus polynomial is not a unit")
        if degree(h) == 0:
            return self
        total = pmul(self.h_terms, h, self.ring.modulus)
        return VarietyPresentation.create(self.ring, self.vars, total)

    # convenience constructors
    def poly(self, terms: Mapping[Exp, int], m: int = 0) -> "LocalizedPoly":
        return LocalizedPoly(self, terms, m)

    def const(self, c: int) -> "LocalizedPoly":
        return LocalizedPoly(self, {self.zero_exp: c})

    def var(self, i: int) -> "LocalizedPoly":
        e = [0] * self.nvars
        e[i] = 1
        return LocalizedPoly(self, {tuple(e): 1})

    def h(self) -> "LocalizedPoly":
        return LocalizedPoly(self, self.h_terms)

    def h_inverse(self, k: int = 1) -> "LocalizedPoly":
        if not self.localized:
            raise UsageError("presentation is not localized")
        return LocalizedPoly(self, {self.zero_exp: 1}, k)

    def var_index(self, name: str) -> int:
        try:
            return self.vars.index(name)
        except ValueError:
            raise UsageError(f"unknown variable {name!r}") from None

    def describe(self) -> str:
        base = f"{self.ring}[{', '.join(self.vars)}]"
        if self.localized:
            base += f"[1/({format_terms(self.h_terms, self)})]"
        return base


@lru_cache(maxsize=None)
def _h_power(pres: VarietyPresentation, k: int) -> Terms:
    if k == 0:
        return {pres.zero_exp: 1}
    return pmul(_h_power(pres, k - 1), pres.h_terms, pres.ring.modulus)


def check_presentation(pres: VarietyPresentation) -> PresentationCertificate:
    """Certify the presentation; raises :class:`PresentationRejected` otherwise."""
    ring = pres.ring
    if ring.p == 2:
        raise PresentationRejected("p = 2 is not supported")
    if len(set(pres.vars)) != len(pres.vars):
        raise PresentationRejected("duplicate variable names")
    for v in pres.vars:
        if not v.isidentifier() or not v[0].islower():
            raise PresentationRejected(f"bad variable name {v!r}")
        if v.startswith("d") and v[1:] in pres.vars:
            raise PresentationRejected(f"variable {v!r} collides with the differential of {v[1:]!r}")
    if pres.inverted is None:
        return PresentationCertificate(None, None)
    h = dict(pres.inverted)
    if any(len(e) != pres.nvars for e in h):
        raise PresentationRejected("inverted polynomial has wrong arity")
    lt = leading(h)
    if not ring.is_unit(h[lt]):
        raise PresentationRejected(
            f"leading coefficient {h[lt]} of the inverted polynomial is not a unit in {ring}"
        )
    return PresentationCertificate(h[lt], lt)


class LocalizedPoly:
    """``num / h^m`` in lowest terms."""

    __slots__ = ("pres", "num", "m", "_hash")

    def __init__(self, pres: VarietyPresentation, num: Mapping[Exp, int], m: int = 0, _normalized=False):
        self.pres = pres
        if _normalized:
            self.num = num
            self.m = m
        else:
            N = pres.ring.modulus
            num = _clean(num, N)
            if m < 0:
                num = pmul(num, pres.h_power(-m), N)
                m = 0
            if not pres.localized:
                m = 0
            elif not num:
                m = 0
            else:
                while m > 0:
                    q, r = pdivmod(num, pres.h_terms, pres.ring)
                    if r:
                        break
                    num, m = q, m - 1
            self.num = num
            self.m = m
        self._hash = None

    # -- basic protocol
    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = self.pres.const(other)
        return (
            isinstance(other, LocalizedPoly)
            and self.pres == other.pres
            and self.m == other.m
            and self.num == other.num
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.pres, self.m, frozenset(self.num.items())))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self.num)

    def is_zero(self) -> bool:
        return not self.num

    def __repr__(self) -> str:
        return f"LocalizedPoly({self})"

    def __str__(self) -> str:
        return format_poly(self)

    def _coerce(self, other) -> "LocalizedPoly":
        if isinstance(other, LocalizedPoly):
            if other.pres != self.pres:
                raise UsageError("presentation mismatch")
            return other
        if isinstance(other, int):
            return self.pres.const(other)
        return NotImplemented

    # -- arithmetic
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        N = self.pres.ring.modulus
        M = max(self.m, other.m)
        a = pmul(self.num, self.pres.h_power(M - self.m), N) if M > self.m else self.num
        b = pmul(other.num, self.pres.h_power(M - other.m), N) if M > other.m else other.num
        return LocalizedPoly(self.pres, padd(a, b, N), M)

    __radd__ = __add__

    def __neg__(self):
        N = self.pres.ring.modulus
        return LocalizedPoly(self.pres, {e: (-c) % N for e, c in self.num.items()}, self.m, _normalized=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            N = self.pres.ring.modulus
            if other % N == 0:
                return LocalizedPoly(self.pres, {}, 0, _normalized=True)
            return LocalizedPoly(self.pres, pscale(self.num, other, N), self.m)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        N = self.pres.ring.modulus
        return LocalizedPoly(self.pres, pmul(self.num, other.num, N), self.m + other.m)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise UsageError("negative powers: use invert_unit")
        out = self.pres.const(1)
        for _ in range(k):
            out = out * self
        return out

    # -- structure
    @property
    def total_degree(self) -> int:
        """deg(num) - m * deg(h); -inf convention replaced by None for zero."""
        if not self.num:
            return None
        return degree(self.num) - self.m * self.pres.h_degree

    def is_constant(self) -> bool:
        return self.m == 0 and all(sum(e) == 0 for e in self.num)

    def constant_value(self) -> int:
        if not self.is_constant():
            raise UsageError(f"{self} is not a constant")
        return self.num.get(self.pres.zero_exp, 0)

    def with_denominator(self, M: int) -> Terms:
        """Numerator G with ``self == G / h^M``; requires ``M >= m``."""
        if M < self.m:
            raise UsageError("denominator exponent too small")
        if M == self.m:
            return dict(self.num)
        return pmul(self.num, self.pres.h_power(M - self.m), self.pres.ring.modulus)

    def change_presentation(self, target: VarietyPresentation, h_extra: Optional[Terms] = None) -> "LocalizedPoly":
        """Restriction along a localization, or coefficient-wise reduction/lift.

        For a restriction ``target`` must invert ``self.pres.h * h_extra``; the
        fraction ``f/h^m`` is rewritten as ``f h_extra^m / (h h_extra)^m``.
        For a change of ring, numerators are mapped coefficient-wise.
        """
        N = target.ring.modulus
        num = {e: c % N for e, c in self.num.items() if c % N}
        if self.m and h_extra is not None:
            extra = dict(h_extra)
            for _ in range(self.m):
                num = pmul(num, extra, N)
        return LocalizedPoly(target, num, self.m)


def partial_derivative(f: LocalizedPoly, i: int) -> LocalizedPoly:
    """``∂(g/h^m) = (∂g·h − m·g·∂h) / h^{m+1}``."""
    pres = f.pres
    N = pres.ring.modulus
    dg = pdiff(f.num, i, N)
    if f.m == 0:
        return LocalizedPoly(pres, dg, 0)
    h = pres.h_terms
    top = padd(pmul(dg, h, N), pmul(f.num, pdiff(h, i, N), N), N, -f.m)
    return LocalizedPoly(pres, top, f.m + 1)


def poly_arith(a: LocalizedPoly, b: LocalizedPoly, op: str) -> LocalizedPoly:
    if a.pres != b.pres:
        raise UsageError("presentation mismatch")
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    raise UsageError(f"unknown operation {op!r}")


def invert_unit(f: LocalizedPoly) -> LocalizedPoly:
    """Inverse of a unit of the localized ring, or ``ZeroDivisionError``.

    ``f = g/h^m`` is a unit iff its reduction ``ḡ`` mod p divides some
    ``h̄^K`` with ``K <= deg ḡ`` (each prime factor of ḡ must divide h̄;
    a single divisor is a Gröbner basis of its ideal, so the remainder test
    is decisive). With ``ḡ q = h̄^K`` the product ``g q / h^K`` is ``1 + ν``,
    ν divisible by p, hence nilpotent, and the geometric series terminates.
    """
    pres = f.pres
    ring = pres.ring
    N = ring.modulus
    base = ring.reduction(1)
    bar = {e: c % ring.p for e, c in f.num.items() if c % ring.p}
    if not bar:
        raise ZeroDivisionError(f"{f} is not a unit (it vanishes mod p)")
    hbar = {e: c % ring.p for e, c in pres.h_terms.items() if c % ring.p}
    quotient = None
    power: Terms = {pres.zero_exp: 1}
    for K in range(degree(bar) + 1 if pres.localized else 1):
        q, r = pdivmod(power, bar, base)
        if not r:
            quotient = (q, K)
            break
        power = pmul(power, hbar, ring.p)
    if quotient is None:
        raise ZeroDivisionError(f"{f} is not a unit")
    q, K = quotient
    approx = LocalizedPoly(pres, q, K)
    nu = approx * LocalizedPoly(pres, f.num, 0) - 1
    total = pres.const(0)
    term = pres.const(1)
    for _ in range(ring.n):
        total = total + term
        term = term * (-nu)
    inv = total * approx * LocalizedPoly(pres, pres.h_power(f.m), 0)
    if inv * f != 1:
        raise ArithmeticError("unit inversion failed its own check")
    return inv


def _monomials_up_to(v: int, bound: int) -> list[Exp]:
    out: list[Exp] = []
    for total in range(bound + 1):
        out.extend(_monomials_of_degree(v, total))
    return out


@lru_cache(maxsize=None)
def _monomials_of_degree(v: int, total: int) -> tuple[Exp, ...]:
    """Exponent vectors of the given degree, descending in lex order."""
    if v == 0:
        return ((),) if total == 0 else ()
    out = []
    for first in range(total, -1, -1):
        for rest in _monomials_of_degree(v - 1, total - first):
            out.append((first,) + rest)
    return tuple(out)


def monomials(v: int, bound: int) -> list[Exp]:
    """All exponent vectors of degree <= bound, in increasing graded-lex order."""
    if bound < 0:
        return []
    return sorted(_monomials_up_to(v, bound), key=grlex_key)


# ---------------------------------------------------------------------------
# printing (inverse of the parser in ``syntax``)


def format_monomial(e: Exp, names: tuple[str, ...]) -> str:
    parts = []
    for k, name in zip(e, names):
        if k == 1:
            parts.append(name)
        elif k > 1:
            parts.append(f"{name}^{k}")
    return "*".join(parts)


def format_terms(terms: Mapping[Exp, int], pres: VarietyPresentation) -> str:
    if not terms:
        return "0"
    ring = pres.ring
    out = []
    for e in sorted(terms, key=grlex_key, reverse=True):
        c = ring.signed(terms[e])
        mono = format_monomial(e, pres.vars)
        sign = "-" if c < 0 else "+"
        a = abs(c)
        if mono:
            body = mono if a == 1 else f"{a}*{mono}"
        else:
            body = str(a)
        out.append((sign, body))
    first_sign, first = out[0]
    s = ("-" if first_sign == "-" else "") + first
    for sign, body in out[1:]:
        s += f" {sign} {body}"
    return s


def _h_string(pres: VarietyPresentation) -> str:
    h = pres.h_terms
    s = format_terms(h, pres)
    if len(h) == 1 and list(h.values())[0] == 1:
        return s
    return f"({s})"


def format_poly(f: LocalizedPoly) -> str:
    num = format_terms(f.num, f.pres)
    if f.m == 0:
        return num
    hp = f"{_h_string(f.pres)}^-{f.m}"
    if len(f.num) == 1 and list(f.num.values())[0] == 1 and not any(list(f.num)[0]):
        return hp
    if len(f.num) == 1:
        if num in ("1", "-1"):
            return ("-" if num == "-1" else "") + hp
        return f"{num}*{hp}"
    return f"({num})*{hp}"
