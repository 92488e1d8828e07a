"""Re-verify a report from its printed witnesses.

Everything here re-parses strings from the report and checks identities with
form arithmetic. It deliberately avoids the library's solvers, frames and
Chern-Weil helpers: determinants are expanded by cofactors, and membership in
``F^{-k}`` is tested by wedging with products of generators (``a ∈ F^{-k}``
iff ``a ∧ ω_M = 0`` for every ``|M| = d - k + 1``).
"""

from __future__ import annotations

from itertools import combinations
from typing import Sequence

from .crystalline import lift_presentation
from .forms import Form, d
from .problem import parse_problem
from .syntax import parse_form, parse_invariant_terms, parse_poly

Claims = list[tuple[str, bool]]


class _Env:
    def __init__(self, report: dict):
        self.report = report
        self.problem = parse_problem(report["problem"])
        self.X = self.problem.X
        self.U = self.X
        self.h = None
        if "open_locus" in self.problem.task:
            self.h = self.problem.open_locus()
            self.U = self.X.localize(self.h)
        level = report["provenance"]["level"]
        self.Xn = self.Un = None
        if self.problem.command in ("crystalline-cohomology", "c4-check", "crystalline-residue"):
            self.Xn = lift_presentation(self.X, level).lifted
            self.Un = self.Xn.localize(self.h) if self.h is not None else self.Xn


def _f(pres, s: str) -> Form:
    return parse_form(pres, s)


def _fl(pres, items) -> list[Form]:
    return [_f(pres, s) for s in items]


def _fm(pres, rows) -> list[list[Form]]:
    return [_fl(pres, r) for r in rows]


def _one(pres) -> Form:
    return Form.function(pres.const(1))


def _wedge_all(pres, forms: Sequence[Form]) -> Form:
    out = _one(pres)
    for w in forms:
        out = out.wedge(w)
    return out


def in_filtration(a: Form, gens: Sequence[Form], k: int) -> bool:
    d_ = len(gens)
    if k <= 0:
        return True
    if k > d_:
        return not a
    return all(not a.wedge(_wedge_all(a.pres, [gens[i] for i in M])) for M in combinations(range(d_), d_ - k + 1))


def _recompose(pres, gens, dec) -> Form:
    out = Form.zero(pres)
    for item in dec:
        out = out + _wedge_all(pres, [gens[i] for i in item["omega"]]).wedge(_f(pres, item["eta"]))
    return out


def _level_claims(name, pres, gens, target: Form, filt: dict, need: int) -> Claims:
    dec = filt["decomposition"]
    out = [(f"{name} = sum of omega_L ^ eta_L", _recompose(pres, gens, dec) == target)]
    out.append((f"{name}: every |L| >= {need}", all(len(it["omega"]) >= need for it in dec)))
    return out


# -- Chern-Weil by cofactor expansion


def _tmul(a: list[Form], b: list[Form], pres) -> list[Form]:
    out = [Form.zero(pres) for _ in range(len(a) + len(b) - 1)]
    for i, x in enumerate(a):
        if not x:
            continue
        for j, y in enumerate(b):
            if y:
                out[i + j] = out[i + j] + x.wedge(y)
    return out


def _tadd(a, b, sign, pres):
    n = max(len(a), len(b))
    a = a + [Form.zero(pres)] * (n - len(a))
    b = b + [Form.zero(pres)] * (n - len(b))
    return [x + y.scale(sign) for x, y in zip(a, b)]


def _det(M: list[list[list[Form]]], pres) -> list[Form]:
    """Determinant of a matrix of t-polynomials with even-degree (commuting) coefficients."""
    m = len(M)
    if m == 0:
        return [_one(pres)]
    total = [Form.zero(pres)]
    for j in range(m):
        minor = [row[:j] + row[j + 1:] for row in M[1:]]
        term = _tmul(M[0][j], _det(minor, pres), pres)
        total = _tadd(total, term, -1 if j % 2 else 1, pres)
    return total


def chern_by_cofactors(K: list[list[Form]], pres) -> list[Form]:
    m = len(K)
    T = [[([_one(pres)] if i == j else [Form.zero(pres)]) + [K[i][j]] for j in range(m)] for i in range(m)]
    out = _det(T, pres)
    return (out + [Form.zero(pres)] * (m + 1))[: m + 1]


def curvature_of(A: list[list[Form]]) -> list[list[Form]]:
    m = len(A)
    pres = A[0][0].pres
    K = []
    for i in range(m):
        row = []
        for j in range(m):
            k = d(A[i][j])
            for l in range(m):
                k = k + A[i][l].wedge(A[l][j])
            row.append(k)
        K.append(row)
    return K


def phi_of(phi_text: str, cs: Sequence[Form], pres) -> Form:
    terms = parse_invariant_terms(phi_text, pres.ring.modulus)
    total = Form.zero(pres)
    for e, coeff in terms.items():
        prod = _one(pres)
        for i, x in enumerate(e):
            c = cs[i + 1] if i + 1 < len(cs) else Form.zero(pres)
            for _ in range(x):
                prod = prod.wedge(c)
        total = total + prod.scale(coeff)
    return total


# -- per-section checks


def _distribution_claims(pres, dist: dict, tag="") -> Claims:
    gens = _fl(pres, dist["generators"])
    alpha = _fm(pres, dist["witness"])
    out = []
    for i, w in enumerate(gens):
        rhs = Form.zero(pres)
        for j, wj in enumerate(gens):
            rhs = rhs + alpha[i][j].wedge(wj)
        out.append((f"{tag}d(omega_{i}) = sum_j alpha_{i}j ^ omega_j", d(w) == rhs))
    if gens:
        J = tuple(sorted(pres.vars.index(v) for v in dist["certificate"]))
        top = _wedge_all(pres, gens)
        coeff = top.terms.get(J)
        minor = parse_poly(pres, dist["minor"])
        inv = parse_poly(pres, dist["minor_inverse"])
        out.append((f"{tag}minor is the dx_J coefficient of omega_1 ^ ... ^ omega_d", coeff == minor))
        out.append((f"{tag}minor * minor_inverse = 1", minor * inv == pres.const(1)))
    return out


def _connection_claims(pres, res: dict, gens=None, tag="") -> tuple[Claims, list[Form]]:
    A = _fm(pres, res["matrix"])
    K = _fm(pres, res["curvature"])
    out = [(f"{tag}curvature = dA + A ^ A", curvature_of(A) == K)] if A else []
    if gens is not None and "curvature_filtration" in res:
        for i, row in enumerate(res["curvature_filtration"]):
            for j, filt in enumerate(row):
                out += _level_claims(f"{tag}K[{i}][{j}]", pres, gens, K[i][j], filt, 1)
    return out, chern_by_cofactors(K, pres) if K else [_one(pres)]


def _bott_claims(pres, res: dict, tag="") -> Claims:
    out = _distribution_claims(pres, res["distribution"], tag)
    gens = _fl(pres, res["distribution"]["generators"])
    claims, cs = _connection_claims(pres, res, gens, tag)
    out += claims
    d_ = len(gens)
    for entry in res["chern"]:
        i = entry["index"]
        c = _f(pres, entry["form"])
        out.append((f"{tag}c_{i} = sum of principal {i}-minors of K", c == cs[i]))
        out += _level_claims(f"{tag}c_{i}", pres, gens, c, entry["filtration"], min(i, d_ + 1))
        out.append((f"{tag}c_{i} in F^-{min(i, d_ + 1)} (wedge test)", in_filtration(c, gens, min(i, d_ + 1))))
    printed = [_one(pres)] + [_f(pres, e["form"]) for e in res["chern"]]
    value = phi_of(res["phi"], printed, pres)
    out.append((f"{tag}phi(c) from printed c_i is zero", not value))
    out.append((f"{tag}printed phi_form is zero", not _f(pres, res["phi_form"])))
    out.append((f"{tag}q > d", res["q"] > d_))
    return out


def _cohomology_claims(pres, res: dict, gens=None, level=None) -> Claims:
    out = []
    i = level or 0

    def closed(a: Form) -> bool:
        if gens is None:
            return not d(a)
        return in_filtration(d(a), gens, i + 1)

    for block in res["cohomology"]:
        j = block["degree"]
        for k, g in enumerate(block["generators"]):
            rep = _f(pres, g["representative"])
            out.append((f"H^{j} generator {k} is a cocycle", closed(rep)))
            if gens is not None:
                out.append((f"H^{j} generator {k} lies in F^-{i}", in_filtration(rep, gens, i)))
            if g["torsion_witness"] is not None:
                w = _f(pres, g["torsion_witness"])
                e = g["order"]
                diff = d(w) - rep.scale(e)
                ok = not diff if gens is None else in_filtration(diff, gens, i + 1) and in_filtration(w, gens, i)
                out.append((f"H^{j} generator {k}: d(witness) = {e} * representative", ok))
            elif g["order"] != pres.ring.modulus:
                out.append((f"H^{j} generator {k}: torsion witness present", False))
    return out


def _residue_claims(X, U, res: dict, phi_text: str, h, tag="") -> Claims:
    a = _f(X, res["a"])
    b = _f(U, res["b"])
    glob = _fm(X, res["global_connection"])
    adapted = _fm(U, res["adapted_connection"])
    cs = chern_by_cofactors(curvature_of(glob), X)
    ca = chern_by_cofactors(curvature_of(adapted), U)
    out = [
        (f"{tag}a = phi(global connection)", a == phi_of(phi_text, cs, X)),
        (f"{tag}phi(adapted connection) = 0", not phi_of(phi_text, ca, U)),
        (f"{tag}da = 0", not d(a)),
        (f"{tag}a|_U - db = 0", a.restrict(U, h) - d(b) == Form.zero(U)),
    ]
    return out


def _fiber_primitive_claims(X, U, h, a: Form, b: Form, prim, tag="") -> Claims:
    if prim is None:
        return []
    a2 = _f(X, prim[0])
    b2 = _f(U, prim[1])
    return [
        (f"{tag}d(primitive_a) = a", d(a2) == a),
        (f"{tag}primitive_a|_U - d(primitive_b) = b", a2.restrict(U, h) - d(b2) == b),
    ]


def _hypothesis_fails(env: _Env) -> bool:
    """Weight at most the codimension, p <= 2q for residues, or a non-flat connection."""
    prob = env.report["problem"]
    U = env.U
    gens = _fl(U, prob["foliation"]["generators"]) if "foliation" in prob else []
    if "phi" in prob:
        weights = {sum((i + 1) * x for i, x in enumerate(e))
                   for e in parse_invariant_terms(prob["phi"], U.ring.modulus)}
        if len(weights) == 1:
            q = weights.pop()
            if gens and q <= len(gens):
                return True
            if env.problem.command in ("residue", "crystalline-residue") and U.ring.p <= 2 * q:
                return True
    conn = prob.get("connection")
    if gens and isinstance(conn, dict) and env.problem.command in ("t1-check", "bott-check"):
        K = curvature_of(_fm(U, conn["matrix"]))
        return not all(in_filtration(k, gens, 1) for row in K for k in row)
    return False


def recheck_report(report: dict) -> Claims:
    status = report["status"]
    cmd = report["command"]
    res = report["result"]
    env = _Env(report)
    X, U, h = env.X, env.U, env.h
    hx = dict(h) if h is not None else None
    if status == "not-integrable":
        gens = _fl(U, report["problem"]["foliation"]["generators"])
        top = _wedge_all(U, gens)
        resid = _fl(U, res["residual"])
        return [
            ("some d(omega_i) ^ omega_1..d is nonzero", any(d(w).wedge(top) for w in gens)),
            ("residual_i ^ omega_1..d = d(omega_i) ^ omega_1..d",
             all(r.wedge(top) == d(w).wedge(top) for r, w in zip(resid, gens))),
        ]
    if status == "obstruction":
        Un = env.Un
        resid = _fl(Un, res["residual"])
        pv = Un.ring.p ** res["valuation"]
        ok = all(val % pv == 0 for r in resid for c in r.terms.values() for val in c.num.values())
        return [
            ("residual is nonzero", any(resid)),
            (f"residual is divisible by {pv}", ok),
            ("residual vanishes mod p", not any(r.change_ring(U) for r in resid)),
        ]
    if status == "hypothesis-unmet":
        return [("a stated hypothesis fails", _hypothesis_fails(env))]
    if status != "ok":
        return []
    if cmd == "check-foliation":
        return _distribution_claims(U, res["distribution"])
    if cmd == "validate-algebroid":
        from .foliation import check_integrability, validate_algebroid

        dist = res["distribution"]
        F = check_integrability(U, _fl(U, dist["generators"]), [U.vars.index(v) for v in dist["certificate"]])
        return _distribution_claims(U, dist) + [("Leibniz identities hold on the sample", validate_algebroid(F).ok)]
    if cmd == "derham-cohomology":
        return _cohomology_claims(U, res)
    if cmd == "crystalline-cohomology":
        return _cohomology_claims(env.Un, res)
    if cmd == "foliated-cohomology":
        gens = _fl(U, res["distribution"]["generators"])
        return _distribution_claims(U, res["distribution"]) + _cohomology_claims(
            U, res, gens, res["filtration_level"]
        )
    if cmd == "chern":
        claims, cs = _connection_claims(U, res)
        for entry in res["chern_forms"]:
            c = _f(U, entry["form"])
            claims.append((f"c_{entry['index']} = sum of principal minors", c == cs[entry["index"]]))
            claims.append((f"d c_{entry['index']} = 0", not d(c)))
        if "phi_form" in res:
            claims.append(("phi_form = phi(c)", _f(U, res["phi_form"]) == phi_of(report["problem"]["phi"], cs, U)))
        return claims
    if cmd == "t1-check":
        out = _distribution_claims(U, res["distribution"])
        gens = _fl(U, res["distribution"]["generators"])
        claims, cs = _connection_claims(U, res, gens)
        out += claims
        for cert in res["certificates"]:
            i = cert["index"]
            c = _f(U, cert["chern_form"])
            out.append((f"c_{i} = sum of principal minors", c == cs[i]))
            need = min(i, len(gens) + 1)
            out += _level_claims(f"c_{i}", U, gens, c, cert["filtration"], need)
            out.append((f"c_{i} maps to zero in the foliated complex", in_filtration(c, gens, 1)))
        return out
    if cmd == "bott-check":
        return _bott_claims(U, res)
    if cmd == "residue":
        out = _distribution_claims(U, res["distribution"])
        out += _residue_claims(X, U, res, report["problem"]["phi"], hx)
        if res.get("primitive") is not None:
            out += _fiber_primitive_claims(X, U, hx, _f(X, res["a"]), _f(U, res["b"]), res["primitive"])
        return out
    if cmd == "c4-check":
        Un = env.Un
        out = _bott_claims(Un, res["lifted"], "lifted: ")
        out += _bott_claims(U, res["base"], "base: ")
        base_gens = _fl(U, res["base"]["distribution"]["generators"])
        lifted_gens = _fl(Un, res["lifted"]["distribution"]["generators"])
        out.append(("lifted generators reduce to the base generators",
                    [w.change_ring(U) for w in lifted_gens] == base_gens))
        lc = [_f(Un, e["form"]).change_ring(U) for e in res["lifted"]["chern"]]
        bc = [_f(U, e["form"]) for e in res["base"]["chern"]]
        out.append(("lifted Chern forms reduce to the base Chern forms", lc == bc))
        return out
    if cmd == "crystalline-residue":
        Xn, Un = env.Xn, env.Un
        phi_text = report["problem"]["phi"]
        out = []
        base_gens = _fl(U, report["problem"]["foliation"]["generators"])
        pairs = []
        for k, r in enumerate(res["residues"]):
            tag = f"S-structure {k}: "
            gens = _fl(Un, r["generators"])
            alpha = _fm(Un, r["witness"])
            for i, w in enumerate(gens):
                rhs = Form.zero(Un)
                for j, wj in enumerate(gens):
                    rhs = rhs + alpha[i][j].wedge(wj)
                out.append((f"{tag}d(omega_{i}) = sum alpha ^ omega", d(w) == rhs))
            out.append((f"{tag}generators reduce to the base", [w.change_ring(U) for w in gens] == base_gens))
            out += _residue_claims(Xn, Un, r, phi_text, hx, tag)
            pairs.append((_f(Xn, r["a"]), _f(Un, r["b"])))
        for diff in res["differences"]:
            k = diff["index"]
            tag = f"difference {k} - {diff['against']}: "
            a = _f(Xn, diff["a"])
            b = _f(Un, diff["b"])
            a0, b0 = pairs[diff["against"]]
            ak, bk = pairs[k]
            out.append((f"{tag}printed difference matches the residues", a == ak - a0 and b == bk - b0))
            out += _fiber_primitive_claims(Xn, Un, hx, a, b, diff["primitive"], tag)
        return out
    raise ValueError(f"no recheck for {cmd}")
