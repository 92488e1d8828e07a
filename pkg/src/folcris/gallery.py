"""Named example problems and generators of flat-along-F connections.

``GALLERY`` maps a name to ``(problem, expected exit status)``. The problems
are plain JSON-ready dicts, so ``scripts/export_gallery.py`` can write them
out as files for the CLI.
"""

from __future__ import annotations

import random
from typing import Iterator

from .chernweil import Connection, is_flat_along
from .forms import Form
from .foliation import Distribution, bott_connection


def problem(p, vars, command, *, n=1, inverted=None, foliation=None, connection=None, phi=None, **task) -> dict:
    out = {"schema": 1, "ring": {"p": p, "n": n}, "variety": {"vars": list(vars)}}
    if inverted is not None:
        out["variety"]["inverted"] = inverted
    if foliation is not None:
        out["foliation"] = {"generators": list(foliation)}
    if connection is not None:
        out["connection"] = connection
    if phi is not None:
        out["phi"] = phi
    out["task"] = {"command": command, **task}
    return out


# foliations used across the gallery: (p, vars, generators, open locus or None)
FOLIATIONS = {
    "a2-dy": (7, "xy", ["dy"], None),
    "a2-radial": (7, "xy", ["x*dy - 2*y*dx"], "x"),
    "a3-dz-zdx": (7, "xyz", ["dz + z*dx"], None),
    "a3-codim2": (7, "xyz", ["dz - x*dy", "dx"], None),
    "a3-dz-ydx-xdy": (11, "xyz", ["dz - y*dx - x*dy"], None),
    "a4-radial": (11, "xyzw", ["x*dy - 2*y*dx"], "x"),
}


def _with_locus(locus, **task):
    if locus is not None:
        task["open_locus"] = locus
    return task


def _build() -> dict[str, tuple[dict, int]]:
    g: dict[str, tuple[dict, int]] = {}
    for name, (p, vars, gens, locus) in FOLIATIONS.items():
        d = len(gens)
        g[f"{name}/check"] = (problem(p, vars, "check-foliation", foliation=gens, **_with_locus(locus)), 0)
        g[f"{name}/t1"] = (problem(p, vars, "t1-check", foliation=gens, connection="bott", **_with_locus(locus)), 0)
        phi = "X1^2" if d == 1 else "X1^3"
        g[f"{name}/bott"] = (
            problem(p, vars, "bott-check", foliation=gens, connection="bott", phi=phi, **_with_locus(locus)),
            0,
        )
        if len(vars) <= 3:
            # only foliations spanned by weight-homogeneous forms give subcomplexes of the truncation
            g[f"{name}/foliated"] = (
                problem(p, vars, "foliated-cohomology", foliation=gens, truncate=2, **_with_locus(locus)),
                0 if name in ("a2-dy", "a2-radial") else 2,
            )
            g[f"{name}/algebroid"] = (
                problem(p, vars, "validate-algebroid", foliation=gens, **_with_locus(locus)),
                0,
            )
        g[f"{name}/c4"] = (
            problem(p, vars, "c4-check", foliation=gens, phi=phi,
                    s_structure={"lift": "verbatim", "n": 2}, **_with_locus(locus)),
            0,
        )

    g["a2-dy/bott-weight1"] = (problem(7, "xy", "bott-check", foliation=["dy"], phi="X1"), 1)
    g["a3-contact/check"] = (problem(7, "xyz", "check-foliation", foliation=["dz + y*dx"]), 1)
    g["a2-dy-f5/foliated-N5"] = (problem(5, "xy", "foliated-cohomology", foliation=["dy"], truncate=5), 0)
    g["a2-dy-f5/gr1-N3"] = (
        problem(5, "xy", "foliated-cohomology", foliation=["dy"], truncate=3, filtration_level=1),
        0,
    )
    g["a2-radial/gr1-N2"] = (
        problem(7, "xy", "foliated-cohomology", foliation=["x*dy - 2*y*dx"], truncate=2,
                filtration_level=1, open_locus="x"),
        0,
    )
    g["a1-z25/derham-N5"] = (problem(5, "x", "derham-cohomology", n=2, truncate=5), 0)
    g["a1-f5/crystalline-n2-N5"] = (problem(5, "x", "crystalline-cohomology", truncate=5, level=2), 0)
    g["a1-localized-z9/derham-N2"] = (problem(3, "x", "derham-cohomology", n=2, inverted="x", truncate=2), 0)
    g["a2-f5/derham-N3"] = (problem(5, "xy", "derham-cohomology", truncate=3), 0)
    g["a2-chern/rank2"] = (
        problem(7, "xy", "chern", connection={"matrix": [["x*dy", "dx"], ["y*dx", "0"]]}, phi="X1^2 + X2"),
        0,
    )
    g["a3-obstructed/c4"] = (
        problem(7, "xyz", "c4-check", foliation=["dz + 7*y*dx"], phi="X1^2",
                s_structure={"lift": "proposal", "n": 2, "generators": ["dz + 7*y*dx"]}),
        1,
    )
    g["a4-residue/lambda2"] = (
        problem(11, "xyzw", "residue", foliation=["x*dy - 2*y*dx"],
                connection={"matrix": [["z*dw + x*dy"]]}, phi="X1^2", open_locus="x"),
        0,
    )
    g["a4-residue/trivial-locus"] = (
        problem(11, "xyzw", "residue", foliation=["dy"],
                connection={"matrix": [["z*dw + x*dy"]]}, phi="X1^2", open_locus="1"),
        0,
    )
    g["a2-residue/lambda3"] = (
        problem(11, "xy", "residue", foliation=["x*dy - 3*y*dx"],
                connection={"matrix": [["x*dy"]]}, phi="X1^2", open_locus="x"),
        0,
    )
    g["a2-residue/small-p"] = (
        problem(3, "xy", "residue", foliation=["x*dy - y*dx"],
                connection={"matrix": [["x*dy"]]}, phi="X1^2", open_locus="x"),
        1,
    )
    g["a4-crystalline-residue/lambda2"] = (
        problem(11, "xyzw", "crystalline-residue", foliation=["x*dy - 2*y*dx"],
                connection={"matrix": [["z*dw + x*dy"]]}, phi="X1^2", open_locus="x",
                s_structure={"lift": "verbatim", "n": 2, "alternatives": [["x*dy - 13*y*dx"]]}),
        0,
    )
    g["a2-crystalline-residue/lambda5"] = (
        problem(11, "xy", "crystalline-residue", foliation=["x*dy - 5*y*dx"],
                connection={"matrix": [["x*dy"]]}, phi="X1^2", open_locus="x",
                s_structure={"lift": "verbatim", "n": 2, "alternatives": [["x*dy - 16*y*dx"]]}),
        0,
    )
    return g


GALLERY: dict[str, tuple[dict, int]] = _build()


def residue_family(lam: int, p: int = 11, n: int = 2, four_dim: bool = True, shift: int = 1) -> dict:
    """crystalline-residue problem for ω = x dy - λ y dx, with λ and λ + shift·p as S-structures."""
    vars = "xyzw" if four_dim else "xy"
    conn = "z*dw + x*dy" if four_dim else "x*dy"
    return problem(
        p, vars, "crystalline-residue", foliation=[f"x*dy - {lam}*y*dx"],
        connection={"matrix": [[conn]]}, phi="X1^2", open_locus="x",
        s_structure={"lift": "verbatim", "n": n, "alternatives": [[f"x*dy - {lam + shift * p}*y*dx"]]},
    )


# ---------------------------------------------------------------------------
# flat-along-F connections


def _random_function(pres, rng: random.Random, degree: int = 2):
    f = pres.const(rng.randrange(pres.ring.modulus))
    for _ in range(rng.randrange(1, degree + 1)):
        f = f + pres.var(rng.randrange(pres.nvars)) * rng.randrange(1, pres.ring.modulus)
    return f


def flat_connections(F: Distribution, rank: int, count: int, seed: int = 0) -> Iterator[Connection]:
    """Connections whose curvature lies in ``F^{-1}``.

    ``A = diag(df_i) + E`` with every entry of E in the ideal generated by the
    ω's, followed by a unipotent gauge change ``g^{-1} dg + g^{-1} A g``. For
    ``rank == F.d`` the Bott connection plus such an E is also produced.
    """
    rng = random.Random(seed)
    pres = F.pres
    zero = Form.zero(pres)
    made = 0
    while made < count:
        A = [[zero for _ in range(rank)] for _ in range(rank)]
        if rank == F.d and made % 3 == 0:
            A = [list(row) for row in bott_connection(F).connection.A]
        else:
            for i in range(rank):
                A[i][i] = Form.function(_random_function(pres, rng)).d()
        for i in range(rank):
            for j in range(rank):
                if F.d and rng.random() < 0.5:
                    w = F.generators[rng.randrange(F.d)]
                    A[i][j] = A[i][j] + w.scale(_random_function(pres, rng, 1))
        if rank >= 2 and rng.random() < 0.7:
            A = _gauge_unipotent(A, pres, _random_function(pres, rng, 1), rng.randrange(rank), rng)
        conn = Connection(pres, tuple(tuple(r) for r in A))
        if not is_flat_along(conn, F):
            raise AssertionError("generated connection is not flat along F")
        made += 1
        yield conn


def _gauge_unipotent(A, pres, a, i, rng):
    """Gauge by ``g = 1 + a E_ij`` (j != i): ``g^{-1} dg + g^{-1} A g``."""
    m = len(A)
    j = (i + 1 + rng.randrange(m - 1)) % m
    one = Form.function(pres.const(1))
    zero = Form.zero(pres)
    fa = Form.function(a)

    def mat(sign):
        return [[(one if r == c else zero) + (fa.scale(sign) if (r, c) == (i, j) else zero) for c in range(m)]
                for r in range(m)]

    g, ginv = mat(1), mat(-1)
    dg = [[x.d() for x in row] for row in g]

    def mul(P, Q):
        return [[sum((P[r][k].wedge(Q[k][c]) for k in range(m)), zero) for c in range(m)] for r in range(m)]

    left = mul(ginv, dg)
    conj = mul(mul(ginv, A), g)
    return [[left[r][c] + conj[r][c] for c in range(m)] for r in range(m)]
