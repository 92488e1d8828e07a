"""Differential forms on a framed variety: the free exterior algebra on dx_1..dx_v."""

from __future__ import annotations

from typing import Iterable, Mapping, Optional, Union

from .poly import LocalizedPoly, Terms, VarietyPresentation, partial_derivative
from .zmod import UsageError

Subset = tuple[int, ...]


def merge_sign(a: Subset, b: Subset) -> tuple[int, Optional[Subset]]:
    """Sign and sorted union for ``e_a ∧ e_b``; ``(0, None)`` if they overlap."""
    sa = set(a)
    if sa.intersection(b):
        return 0, None
    inversions = sum(1 for x in a for y in b if x > y)
    return (-1 if inversions % 2 else 1), tuple(sorted(a + b))


def wedge_terms(a: Mapping[Subset, LocalizedPoly], b: Mapping[Subset, LocalizedPoly]) -> dict:
    """Exterior product of two term dictionaries over any frame."""
    out: dict[Subset, LocalizedPoly] = {}
    for I, f in a.items():
        for J, g in b.items():
            s, K = merge_sign(I, J)
            if not s:
                continue
            c = f * g
            if s < 0:
                c = -c
            prev = out.get(K)
            out[K] = c if prev is None else prev + c
    return {K: c for K, c in out.items() if c}


def add_terms(a: Mapping[Subset, LocalizedPoly], b: Mapping[Subset, LocalizedPoly], scale: int = 1) -> dict:
    out = dict(a)
    for K, c in b.items():
        c = c if scale == 1 else c * scale
        prev = out.get(K)
        out[K] = c if prev is None else prev + c
    return {K: c for K, c in out.items() if c}


Scalar = Union[int, LocalizedPoly]


class Form:
    """An element of Ω^*: map from increasing index tuples to coefficients."""

    __slots__ = ("pres", "terms")

    def __init__(self, pres: VarietyPresentation, terms: Optional[Mapping[Subset, LocalizedPoly]] = None):
        self.pres = pres
        clean = {}
        for I, c in (terms or {}).items():
            I = tuple(I)
            if list(I) != sorted(set(I)):
                raise UsageError(f"index tuple {I} must be strictly increasing")
            if any(i < 0 or i >= pres.nvars for i in I):
                raise UsageError(f"index tuple {I} out of range")
            if isinstance(c, int):
                c = pres.const(c)
            if c.pres != pres:
                raise UsageError("coefficient presentation mismatch")
            if c:
                clean[I] = c
        self.terms = clean

    @classmethod
    def _raw(cls, pres, terms) -> "Form":
        f = object.__new__(cls)
        f.pres = pres
        f.terms = terms
        return f

    # constructors
    @classmethod
    def zero(cls, pres: VarietyPresentation) -> "Form":
        return cls._raw(pres, {})

    @classmethod
    def function(cls, f: LocalizedPoly) -> "Form":
        return cls._raw(f.pres, {(): f} if f else {})

    @classmethod
    def dx(cls, pres: VarietyPresentation, *idx: int) -> "Form":
        """``dx_{i1} ∧ dx_{i2} ∧ ...`` in the given order."""
        out = cls.function(pres.const(1))
        for i in idx:
            out = out.wedge(cls._raw(pres, {(i,): pres.const(1)}))
        return out

    # protocol
    def __eq__(self, other) -> bool:
        if isinstance(other, int) and other == 0:
            return not self.terms
        return isinstance(other, Form) and self.pres == other.pres and self.terms == other.terms

    def __hash__(self):
        return hash((self.pres, frozenset(self.terms.items())))

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __repr__(self) -> str:
        return f"Form({self})"

    def __str__(self) -> str:
        from .syntax import format_form

        return format_form(self)

    def degrees(self) -> set[int]:
        return {len(I) for I in self.terms}

    @property
    def degree(self) -> int:
        """Form degree of a homogeneous form (0 for the zero form)."""
        ds = self.degrees()
        if len(ds) > 1:
            raise UsageError(f"inhomogeneous form (degrees {sorted(ds)})")
        return ds.pop() if ds else 0

    def homogeneous_part(self, j: int) -> "Form":
        return Form._raw(self.pres, {I: c for I, c in self.terms.items() if len(I) == j})

    @property
    def total_degree(self) -> Optional[int]:
        """max(coefficient degree + form degree); None for the zero form."""
        vals = [c.total_degree + len(I) for I, c in self.terms.items()]
        return max(vals) if vals else None

    def _check(self, other: "Form"):
        if not isinstance(other, Form):
            raise UsageError(f"expected a Form, got {type(other).__name__}")
        if other.pres != self.pres:
            raise UsageError("presentation mismatch")

    # arithmetic
    def __add__(self, other: "Form") -> "Form":
        if isinstance(other, int) and other == 0:
            return self
        self._check(other)
        return Form._raw(self.pres, add_terms(self.terms, other.terms))

    __radd__ = __add__

    def __neg__(self) -> "Form":
        return Form._raw(self.pres, {I: -c for I, c in self.terms.items()})

    def __sub__(self, other: "Form") -> "Form":
        self._check(other)
        return Form._raw(self.pres, add_terms(self.terms, other.terms, -1))

    def scale(self, c: Scalar) -> "Form":
        if isinstance(c, int):
            c = self.pres.const(c)
        if c.pres != self.pres:
            raise UsageError("presentation mismatch")
        return Form._raw(self.pres, {I: v * c for I, v in self.terms.items() if v * c})

    def wedge(self, other: "Form") -> "Form":
        self._check(other)
        return Form._raw(self.pres, wedge_terms(self.terms, other.terms))

    def __mul__(self, other):
        if isinstance(other, Form):
            return self.wedge(other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def d(self) -> "Form":
        return d(self)

    def map_coefficients(self, target: VarietyPresentation, fn) -> "Form":
        out = {}
        for I, c in self.terms.items():
            v = fn(c)
            if v:
                out[I] = v
        return Form._raw(target, out)

    def restrict(self, target: VarietyPresentation, h_extra: Optional[Terms] = None) -> "Form":
        """Image under restriction to an open (``target`` inverts ``h * h_extra``)."""
        return self.map_coefficients(target, lambda c: c.change_presentation(target, h_extra))

    def change_ring(self, target: VarietyPresentation) -> "Form":
        """Coefficient-wise reduction (or representative lift) to another ring."""
        return self.map_coefficients(target, lambda c: c.change_presentation(target))


def wedge(a: Form, b: Form) -> Form:
    return a.wedge(b)


def d(a: Form) -> Form:
    """Exterior derivative: ``d(f dx_I) = Σ_i ∂_i f dx_i ∧ dx_I``."""
    out: dict[Subset, LocalizedPoly] = {}
    for I, f in a.terms.items():
        for i in range(a.pres.nvars):
            if i in I:
                continue
            df = partial_derivative(f, i)
            if not df:
                continue
            before = sum(1 for j in I if j < i)
            if before % 2:
                df = -df
            K = tuple(sorted(I + (i,)))
            prev = out.get(K)
            out[K] = df if prev is None else prev + df
    return Form._raw(a.pres, {K: c for K, c in out.items() if c})


def sum_forms(pres: VarietyPresentation, forms: Iterable[Form]) -> Form:
    out = Form.zero(pres)
    for f in forms:
        out = out + f
    return out
