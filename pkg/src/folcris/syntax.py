"""Text syntax for polynomials, forms and invariant polynomials.

Grammar (whitespace ignored)::

    expr   := term (('+' | '-') term)*
    term   := unary ('*' unary)*
    unary  := '-' unary | power
    power  := atom ('^' ['-'] INT)?
    atom   := INT | VAR | 'd' VAR | '(' expr ')'

``*`` is the wedge product (ordinary multiplication on functions), ``dVAR``
is the differential of a variable. A negative exponent is allowed only on
an expression equal to the inverted polynomial h. Variable names match
``[a-z][a-z0-9]*``.
"""

from __future__ import annotations

import re
from typing import Optional

from .forms import Form
from .poly import LocalizedPoly, VarietyPresentation, format_terms, format_poly
from .zmod import UsageError

VAR_RE = re.compile(r"[a-z][a-z0-9]*\Z")
_TOKEN = re.compile(r"\s*(?:(\d+)|([a-zA-Z][a-zA-Z0-9]*)|(.))")


class SyntaxProblem(UsageError):
    """Parse error; ``position`` is a 0-based character offset."""

    def __init__(self, message: str, text: str, position: int):
        super().__init__(f"{message} at position {position} in {text!r}")
        self.position = position


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise SyntaxProblem(f"unexpected character {text[bad]!r}", text, bad)
        start = m.start(m.lastindex)
        if m.group(1) is not None:
            out.append(("int", int(m.group(1)), start))
        elif m.group(2) is not None:
            out.append(("name", m.group(2), start))
        elif m.group(3).strip():
            out.append(("op", m.group(3), start))
        pos = m.end()
    out.append(("end", None, len(text)))
    return out


class _Parser:
    def __init__(self, text: str, resolve_name, one, pow_fn, neg_pow_fn):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.resolve_name = resolve_name
        self.one = one
        self.pow_fn = pow_fn
        self.neg_pow_fn = neg_pow_fn

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        if t[0] != "end":
            self.i += 1
        return t

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        raise SyntaxProblem(msg, self.text, tok[2])

    def parse(self):
        if self.peek()[0] == "end":
            self.error("empty expression")
        v = self.expr()
        if self.peek()[0] != "end":
            self.error(f"unexpected {self.peek()[1]!r}")
        return v

    def expr(self):
        v = self.term()
        while self.peek() in (("op", "+", self.peek()[2]), ("op", "-", self.peek()[2])):
            op = self.take()[1]
            w = self.term()
            v = v + w if op == "+" else v - w
        return v

    def term(self):
        v = self.unary()
        while self.peek()[:2] == ("op", "*"):
            self.take()
            v = v * self.unary()
        return v

    def unary(self):
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return -self.unary()
        return self.power()

    def power(self):
        base_tok = self.peek()
        v = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            neg = False
            if self.peek()[:2] == ("op", "-"):
                self.take()
                neg = True
            t = self.take()
            if t[0] != "int":
                self.error("expected an integer exponent", t)
            try:
                v = self.neg_pow_fn(v, t[1]) if neg else self.pow_fn(v, t[1])
            except UsageError as exc:
                raise SyntaxProblem(str(exc), self.text, base_tok[2]) from None
        return v

    def atom(self):
        t = self.take()
        if t[0] == "int":
            return self.one * t[1]
        if t[0] == "name":
            try:
                return self.resolve_name(t[1])
            except UsageError as exc:
                raise SyntaxProblem(str(exc), self.text, t[2]) from None
        if t[:2] == ("op", "("):
            v = self.expr()
            if self.take()[:2] != ("op", ")"):
                self.error("expected ')'")
            return v
        if t[0] == "end":
            self.error("unexpected end of input", t)
        self.error(f"unexpected {t[1]!r}", t)


def _form_pow(v: Form, k: int) -> Form:
    if v.degrees() - {0}:
        if k == 1:
            return v
        raise UsageError("only functions can be raised to a power")
    out = Form.function(v.pres.const(1))
    for _ in range(k):
        out = out.wedge(v)
    return out


def _form_neg_pow(v: Form, k: int) -> Form:
    pres = v.pres
    if not pres.localized or v != Form.function(pres.h()):
        raise UsageError("negative exponents are only allowed on the inverted polynomial")
    return Form.function(pres.h_inverse(k))


def parse_form(pres: VarietyPresentation, text: str) -> Form:
    """Parse a differential form (functions are 0-forms)."""

    def resolve(name: str) -> Form:
        if name in pres.vars:
            return Form.function(pres.var(pres.vars.index(name)))
        if name.startswith("d") and name[1:] in pres.vars:
            return Form.dx(pres, pres.vars.index(name[1:]))
        raise UsageError(f"unknown name {name!r}")

    one = Form.function(pres.const(1))
    return _Parser(str(text), resolve, one, _form_pow, _form_neg_pow).parse()


def parse_poly(pres: VarietyPresentation, text: str) -> LocalizedPoly:
    f = parse_form(pres, text)
    if f.degrees() - {0}:
        raise SyntaxProblem("expected a function, got a differential form", str(text), 0)
    return f.terms.get((), pres.const(0))


def parse_plain_poly(ring, vars, text: str) -> dict:
    """Parse a polynomial with no localization (e.g. the inverted h itself)."""
    pres = VarietyPresentation(ring, tuple(vars), None)
    f = parse_poly(pres, text)
    return dict(f.num)


def format_form(f: Form) -> str:
    if not f.terms:
        return "0"
    pieces = []
    for I in sorted(f.terms, key=lambda I: (len(I), I)):
        c = f.terms[I]
        dx = "*".join("d" + f.pres.vars[i] for i in I)
        cs = format_poly(c)
        if not dx:
            body = cs if len(c.num) == 1 else f"({cs})"
        elif cs == "1":
            body = dx
        elif cs == "-1":
            body = "-" + dx
        elif len(c.num) == 1 or cs.startswith("("):
            body = f"{cs}*{dx}"
        else:
            body = f"({cs})*{dx}"
        pieces.append(body)
    s = pieces[0]
    for b in pieces[1:]:
        s += f" - {b[1:]}" if b.startswith("-") else f" + {b}"
    return s


# ---------------------------------------------------------------------------
# invariant polynomials in X1, X2, ...

_XVAR = re.compile(r"X(\d+)\Z")


class _Sym:
    """Polynomial in X1..Xk with integer coefficients (exponent dict)."""

    def __init__(self, terms: dict, N: int):
        self.N = N
        self.terms = {e: c % N for e, c in terms.items() if c % N}

    def _pad(self, e, k):
        return tuple(e) + (0,) * (k - len(e))

    def __add__(self, o):
        k = max(self._len(), o._len())
        out = {}
        for src in (self.terms, o.terms):
            for e, c in src.items():
                e = self._pad(e, k)
                out[e] = out.get(e, 0) + c
        return _Sym(out, self.N)

    def __neg__(self):
        return _Sym({e: -c for e, c in self.terms.items()}, self.N)

    def __sub__(self, o):
        return self + (-o)

    def __mul__(self, o):
        if isinstance(o, int):
            return _Sym({e: c * o for e, c in self.terms.items()}, self.N)
        k = max(self._len(), o._len())
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in o.terms.items():
                e = tuple(a + b for a, b in zip(self._pad(e1, k), self._pad(e2, k)))
                out[e] = out.get(e, 0) + c1 * c2
        return _Sym(out, self.N)

    def _len(self):
        return max((len(e) for e in self.terms), default=0)


def parse_invariant_terms(text: str, modulus: int) -> dict[tuple[int, ...], int]:
    """Parse ``X1^2 + 3*X2`` into ``{exponent-vector: coefficient}``."""

    def resolve(name: str):
        m = _XVAR.match(name)
        if not m or int(m.group(1)) < 1:
            raise UsageError(f"unknown name {name!r} (expected X1, X2, ...)")
        i = int(m.group(1))
        e = [0] * i
        e[i - 1] = 1
        return _Sym({tuple(e): 1}, modulus)

    def pw(v, k):
        out = _Sym({(): 1}, modulus)
        for _ in range(k):
            out = out * v
        return out

    def npw(v, k):
        raise UsageError("negative exponents are not allowed here")

    sym = _Parser(str(text), resolve, _Sym({(): 1}, modulus), pw, npw).parse()
    k = sym._len()
    return {sym._pad(e, k): c for e, c in sym.terms.items()}


def format_invariant(terms: dict[tuple[int, ...], int], ring) -> str:
    if not terms:
        return "0"
    k = max(len(e) for e in terms)
    names = tuple(f"X{i + 1}" for i in range(k))
    padded = {tuple(e) + (0,) * (k - len(e)): c for e, c in terms.items()}

    class _P:
        pass

    pres = _P()
    pres.ring = ring
    pres.vars = names
    return format_terms(padded, pres)


def check_var_names(names) -> Optional[str]:
    for v in names:
        if not VAR_RE.match(v):
            return f"variable name {v!r} does not match [a-z][a-z0-9]*"
    return None
