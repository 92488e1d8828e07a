"""``folcris`` command line: run one problem file, print a report.

Exit status: 0 computed/verified, 1 hypothesis unmet or obstruction (a report
is still written), 2 malformed input, 3 internal inconsistency.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Callable, Optional, Sequence

from . import __version__
from ._parallel import pmap
from .chernweil import (
    Connection,
    HypothesisUnmet,
    InvariantPolynomial,
    chern_forms,
    difference_class,
    phi_form,
    residue,
    verify_bott_vanishing,
    verify_theorem_t1,
)
from .crystalline import (
    Lift,
    Obstruction,
    lift_foliation,
    lift_presentation,
    reduce_certificate,
    verify_c4,
)
from .derham import CohomologyReport, TruncatedComplex, derham_complex
from .forms import Form
from .foliation import (
    Distribution,
    FiltrationLevel,
    InternalInconsistency,
    NotIntegrable,
    NotTransversallySmooth,
    bott_connection,
    check_integrability,
    coefficient_matrix,
    determinant,
    foliated_complex,
    graded_piece,
    validate_algebroid,
)
from .poly import VarietyPresentation, format_poly, invert_unit
from .problem import (
    COMMANDS,
    InputError,
    Problem,
    load_json,
    parse_forms,
    parse_matrix,
    parse_problem,
)
from .syntax import format_form, format_invariant
from .zmod import LinearSystem, UsageError

EXIT_OK, EXIT_UNMET, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3

DETERMINISM_NOTE = (
    "exact arithmetic, fixed pivot order; validate-algebroid samples with seed 0; "
    "output does not depend on FOLCRIS_THREADS"
)

COHOMOLOGY_COMMANDS = {"foliated-cohomology", "derham-cohomology", "crystalline-cohomology"}
CRYSTALLINE_COMMANDS = {"crystalline-cohomology", "c4-check", "crystalline-residue"}


class Unmet(Exception):
    """Carries an exit-1 outcome: status word, message and partial result."""

    def __init__(self, status: str, message: str, result: Optional[dict] = None):
        super().__init__(message)
        self.status = status
        self.result = result or {}


# ---------------------------------------------------------------------------
# serialization helpers


def fs(a: Form) -> str:
    return format_form(a)


def fmat(M) -> list[list[str]]:
    return [[fs(a) for a in row] for row in M]


def flevel(lv: FiltrationLevel) -> dict:
    return {
        "level": lv.level,
        "decomposition": [{"omega": list(L), "eta": fs(eta)} for L, eta in lv.decomposition],
    }


def var_names(pres: VarietyPresentation, idx) -> list[str]:
    return [pres.vars[i] for i in idx]


def distribution_json(F: Distribution) -> dict:
    W = coefficient_matrix(F.pres, F.generators)
    one = F.pres.const(1)
    minor = determinant([[row[j] for j in F.certificate] for row in W], one) if F.d else one
    return {
        "generators": [fs(w) for w in F.generators],
        "certificate": var_names(F.pres, F.certificate),
        "complement": var_names(F.pres, F.frame.complement),
        "minor": format_poly(minor),
        "minor_inverse": format_poly(invert_unit(minor)),
        "witness": fmat(F.alpha),
    }


# ---------------------------------------------------------------------------
# building objects from a problem


class Context:
    """Presentations and parsed objects for one problem."""

    def __init__(self, problem: Problem):
        self.problem = problem
        self.X = problem.X
        self.h = None
        self.U = self.X
        if "open_locus" in problem.task:
            self.h = problem.open_locus()
            self.U = problem.localize(self.X, self.h)
        self.lift: Optional[Lift] = None
        self.lift_U: Optional[Lift] = None
        if problem.command in CRYSTALLINE_COMMANDS:
            if problem.ring.n != 1:
                raise InputError("ring.n: crystalline commands start from a prime field (n = 1)")
            level = self.level()
            self.lift = lift_presentation(self.X, level)
            self.lift_U = lift_presentation(self.U, level) if self.h is not None else self.lift

    def level(self) -> int:
        task = self.problem.task
        ss = task.get("s_structure")
        if "level" in task:
            n = self.problem.option("level")
        elif isinstance(ss, dict) and "n" in ss:
            n = ss["n"]
            if not isinstance(n, int) or isinstance(n, bool):
                raise InputError("task.s_structure.n: expected int")
        else:
            raise InputError("task.level: missing (or give task.s_structure.n)")
        if n < 1:
            raise InputError("task.level: must be >= 1")
        return n

    def truncation(self) -> int:
        N = self.problem.option("truncate")
        if N is None:
            raise InputError(f"task.truncate: required for {self.problem.command} (use --truncate N)")
        if N < 0:
            raise InputError("task.truncate: must be >= 0")
        return N

    def distribution(self, pres: Optional[VarietyPresentation] = None) -> Distribution:
        pres = pres or self.U
        gens, cert, witness = self.problem.foliation_data(pres)
        return check_integrability(pres, gens, cert, witness)

    def connection(self, pres: VarietyPresentation, key: str = "connection", F: Optional[Distribution] = None,
                   where: Optional[dict] = None) -> Connection:
        entry = self.problem.connection_entry(key, where)
        if entry == "bott":
            if F is None:
                raise InputError(f"{key}: the Bott connection needs a foliation block")
            return bott_connection(F).connection
        rows, path = entry
        return Connection(pres, tuple(tuple(r) for r in parse_matrix(pres, rows, path)))

    def phi(self, ring=None) -> InvariantPolynomial:
        try:
            return InvariantPolynomial.parse(ring or self.problem.ring, self.problem.phi_text())
        except InputError:
            raise
        except UsageError as exc:
            raise InputError(f"phi: {exc}") from None

    def s_structure_block(self) -> dict:
        ss = self.problem.task.get("s_structure", {"lift": "verbatim"})
        if not isinstance(ss, dict):
            raise InputError("task.s_structure: expected an object")
        unknown = set(ss) - {"lift", "n", "generators", "alternatives"}
        if unknown:
            raise InputError(f"task.s_structure.{sorted(unknown)[0]}: unknown key")
        return ss

    def s_proposals(self, F: Distribution) -> list[list[Form]]:
        """Generator lists over the lifted open, primary first."""
        ss = self.s_structure_block()
        target = self.lift_U.lifted
        mode = ss.get("lift", "verbatim" if "generators" not in ss else "proposal")
        if mode == "verbatim":
            if "generators" in ss:
                raise InputError('task.s_structure.generators: not allowed with lift = "verbatim"')
            primary = [self.lift_U.lift_form(w) for w in F.generators]
        elif mode == "proposal":
            if "generators" not in ss:
                raise InputError("task.s_structure.generators: missing")
            primary = parse_forms(target, ss["generators"], "task.s_structure.generators")
        else:
            raise InputError(f'task.s_structure.lift: expected "verbatim" or "proposal", got {mode!r}')
        out = [primary]
        alts = ss.get("alternatives", [])
        if not isinstance(alts, list):
            raise InputError("task.s_structure.alternatives: expected a list")
        for k, alt in enumerate(alts):
            out.append(parse_forms(target, alt, f"task.s_structure.alternatives[{k}]"))
        return out


# ---------------------------------------------------------------------------
# canonical echo


def canonical_problem(problem: Problem) -> dict:
    """Problem data with every form and polynomial in canonical printed form."""
    data = json.loads(json.dumps(problem.data))
    X = problem.X
    if data["variety"].get("inverted") is not None:
        data["variety"]["inverted"] = format_poly(X.h()) if X.localized else "1"
    task = data["task"]
    U = X
    if "open_locus" in task:
        h = problem.open_locus()
        U = problem.localize(X, h)
        task["open_locus"] = format_poly(X.poly(h))
    fol = data.get("foliation")
    if isinstance(fol, dict):
        if "generators" in fol:
            fol["generators"] = [fs(w) for w in parse_forms(U, fol["generators"], "foliation.generators")]
        if fol.get("witness") is not None:
            fol["witness"] = fmat(parse_matrix(U, fol["witness"], "foliation.witness"))
    residue_like = problem.command in ("residue", "crystalline-residue")
    conn_pres = X if residue_like else U
    lifted = None
    lifted_U = None
    if problem.command in CRYSTALLINE_COMMANDS and problem.ring.n == 1:
        try:
            n = Context(problem).level()
        except InputError:
            n = None
        if n is not None:
            lifted = lift_presentation(X, n).lifted
            lifted_U = lift_presentation(U, n).lifted if U is not X else lifted
    if problem.command == "crystalline-residue" and lifted is not None:
        conn_pres = lifted
    conn = data.get("connection")
    if isinstance(conn, dict) and "matrix" in conn:
        conn["matrix"] = fmat(parse_matrix(conn_pres, conn["matrix"], "connection.matrix"))
    adapted = task.get("adapted")
    if isinstance(adapted, dict) and "matrix" in adapted:
        adapted["matrix"] = fmat(parse_matrix(U, adapted["matrix"], "task.adapted.matrix"))
    if "phi" in data and isinstance(data["phi"], str):
        try:
            phi = InvariantPolynomial.parse(problem.ring, data["phi"])
            data["phi"] = format_invariant(dict(phi.terms), problem.ring)
        except UsageError as exc:
            raise InputError(f"phi: {exc}") from None
    ss = task.get("s_structure")
    if isinstance(ss, dict) and lifted_U is not None:
        if isinstance(ss.get("generators"), list):
            ss["generators"] = [fs(w) for w in parse_forms(lifted_U, ss["generators"], "task.s_structure.generators")]
        if isinstance(ss.get("alternatives"), list):
            ss["alternatives"] = [
                [fs(w) for w in parse_forms(lifted_U, alt, f"task.s_structure.alternatives[{k}]")]
                for k, alt in enumerate(ss["alternatives"])
            ]
    return data


# ---------------------------------------------------------------------------
# commands


def torsion_witness(C: TruncatedComplex, j: int, gen, e: int) -> Optional[Form]:
    """``w`` with ``d w = p^e g`` for a summand of order ``p^e`` (None for free summands)."""
    ring = C.ring
    if e >= ring.n:
        return None
    target = [(ring.p**e * v) % ring.modulus for v in gen]
    if j == 0:
        if any(target):
            raise InternalInconsistency("degree-0 torsion class with nonzero multiple")
        return Form.zero(C.pres)
    x = LinearSystem(C.differential(j - 1)).solve(target)
    return C.decode(j - 1, x)


def cohomology_json(C: TruncatedComplex) -> dict:
    def one(j):
        rep: CohomologyReport = C.cohomology_report(j)
        gens = []
        for (e, g), form in zip(rep.decomposition.summands, rep.representatives):
            w = torsion_witness(C, j, g, e)
            gens.append(
                {
                    "order": C.ring.p**e,
                    "representative": fs(form),
                    "torsion_witness": None if w is None else fs(w),
                }
            )
        return {
            "degree": j,
            "module": rep.decomposition.describe(),
            "free_rank": rep.free_rank,
            "torsion": [C.ring.p**e for e in rep.torsion],
            "generators": gens,
        }

    return {
        "complex": C.label,
        "truncation": C.N,
        "ranks": [C.rank(j) for j in range(C.top + 1)],
        "cohomology": pmap(one, range(C.top + 1)),
    }


def cmd_check_foliation(ctx: Context) -> dict:
    F = ctx.distribution()
    return {"presentation": ctx.U.describe(), "codimension": F.d, "distribution": distribution_json(F)}


def cmd_foliated_cohomology(ctx: Context) -> dict:
    N = ctx.truncation()
    F = ctx.distribution()
    i = ctx.problem.option("filtration_level")
    if i is None:
        C = foliated_complex(F, N)
    else:
        if i < 0:
            raise InputError("task.filtration_level: must be >= 0")
        C = graded_piece(F, i, N)
    out = {"filtration_level": i, "distribution": distribution_json(F)}
    out.update(cohomology_json(C))
    return out


def cmd_derham_cohomology(ctx: Context) -> dict:
    return cohomology_json(derham_complex(ctx.U, ctx.truncation()))


def cmd_crystalline_cohomology(ctx: Context) -> dict:
    N = ctx.truncation()
    C = derham_complex(ctx.lift_U.lifted, N)
    C.label = f"crystalline (level {ctx.lift.level})"
    out = {"level": ctx.lift.level, "lifted_ring": str(ctx.lift.lifted.ring)}
    out.update(cohomology_json(C))
    return out


def _connection_json(conn: Connection) -> dict:
    return {"matrix": fmat(conn.A), "curvature": fmat(conn.curvature())}


def cmd_chern(ctx: Context) -> dict:
    F = ctx.distribution() if "foliation" in ctx.problem.data else None
    conn = ctx.connection(ctx.U, F=F)
    cs = chern_forms(conn)
    out = _connection_json(conn)
    out["convention"] = "det(1 + tK)"
    out["chern_forms"] = [{"index": i, "form": fs(cs[i]), "closed": not cs[i].d()} for i in range(1, len(cs))]
    if "phi" in ctx.problem.data:
        phi = ctx.phi()
        out["phi_form"] = fs(phi_form(conn, phi))
    return out


def _flatness_json(conn: Connection, F: Distribution) -> list:
    from .chernweil import is_flat_along

    flat = is_flat_along(conn, F)
    return [[flevel(lv) for lv in row] for row in flat.levels]


def cmd_t1_check(ctx: Context) -> dict:
    F = ctx.distribution()
    conn = ctx.connection(ctx.U, F=F)
    idx = ctx.problem.option("index")
    indices = [idx] if idx is not None else list(range(1, conn.rank + 1))
    certs = []
    for i in indices:
        cert = verify_theorem_t1(conn, F, i)
        forms = dict(cert.forms)
        certs.append(
            {
                "index": i,
                "chern_form": fs(forms[f"c_{i}"]),
                "foliated_image": fs(forms["foliated image"]),
                "filtration": flevel(dict(cert.levels)[f"c_{i}"]),
                "statement": cert.statement,
            }
        )
    out = {"distribution": distribution_json(F)}
    out.update(_connection_json(conn))
    out["curvature_filtration"] = _flatness_json(conn, F)
    out["certificates"] = certs
    return out


def _bott_json(conn: Connection, F: Distribution, phi: InvariantPolynomial) -> dict:
    cert = verify_bott_vanishing(conn, F, phi)
    forms = dict(cert.forms)
    details = dict(cert.details)
    out = {"distribution": distribution_json(F)}
    out.update(_connection_json(conn))
    out["curvature_filtration"] = _flatness_json(conn, F)
    out["phi"] = format_invariant(dict(phi.terms), phi.ring)
    out["q"] = details["q"]
    out["d"] = details["d"]
    out["phi_form"] = fs(forms["phi_form"])
    out["chern"] = [
        {"index": int(name.split("_")[1]), "form": fs(forms[name]), "filtration": flevel(lv)}
        for name, lv in cert.levels
    ]
    out["certificate"] = f"phi_form = 0, F^-{details['q']} witness"
    out["statement"] = cert.statement
    return out


def cmd_bott_check(ctx: Context) -> dict:
    F = ctx.distribution()
    conn = ctx.connection(ctx.U, F=F)
    return _bott_json(conn, F, ctx.phi())


def _residue_json(res) -> dict:
    out = {
        "a": fs(res.a),
        "b": fs(res.b),
        "degree": res.degree,
        "fiber_closed": res.fiber_closed,
        "global_connection": fmat(res.global_connection.A),
        "adapted_connection": fmat(res.adapted_connection.A),
    }
    return out


def cmd_residue(ctx: Context) -> dict:
    if ctx.h is None:
        raise InputError("task.open_locus: missing")
    F = ctx.distribution(ctx.U)
    glob = ctx.connection(ctx.X, "connection")
    adapted = None
    if "adapted" in ctx.problem.task:
        adapted = ctx.connection(ctx.U, "adapted", F=F, where=ctx.problem.task)
    phi = ctx.phi()
    res = residue(ctx.X, ctx.h, F, glob, phi, adapted)
    out = {"distribution": distribution_json(F)}
    out.update(_residue_json(res))
    out["projection_is_phi_form"] = res.a == phi_form(glob, phi)
    if ctx.U == ctx.X:
        # the fiber complex of the identity restriction is acyclic: (a, b) = D(b, 0)
        out["class"] = "zero"
        out["primitive"] = [fs(res.b), fs(Form.zero(ctx.U))]
    else:
        out["class"] = "zero" if res.is_zero() else "cocycle"
        out["primitive"] = None
    return out


def cmd_c4_check(ctx: Context) -> dict:
    F = ctx.distribution(ctx.U)
    phi = ctx.phi()
    proposals = ctx.s_proposals(F)
    try:
        SS = lift_foliation(F, ctx.lift_U, proposals[:1])
    except Obstruction as exc:
        raise Unmet(
            "obstruction",
            str(exc),
            {"level": ctx.lift.level, "residual": [fs(r) for r in exc.residual], "valuation": exc.valuation},
        ) from None
    lifted_phi = phi.with_ring(SS.distribution.pres.ring)
    cert = verify_c4(SS, phi)
    base_cert = verify_bott_vanishing(bott_connection(F).connection, F, phi)
    reduced = reduce_certificate(cert, F.pres)
    out = {
        "level": ctx.lift.level,
        "lifted_ring": str(ctx.lift.lifted.ring),
        "witness_reduces": SS.witness_reduces,
        "lifted": _bott_json(bott_connection(SS.distribution).connection, SS.distribution, lifted_phi),
        "base": _bott_json(bott_connection(F).connection, F, phi),
        "reduces_to_base": reduced == base_cert.forms,
    }
    if not out["reduces_to_base"]:
        raise InternalInconsistency("c4 certificate does not reduce to the base certificate")
    return out


def cmd_crystalline_residue(ctx: Context) -> dict:
    if ctx.h is None:
        raise InputError("task.open_locus: missing")
    F = ctx.distribution(ctx.U)
    phi = ctx.phi()
    Xn = ctx.lift.lifted
    glob = ctx.connection(Xn, "connection")
    lifted_phi = phi.with_ring(Xn.ring)
    proposals = ctx.s_proposals(F)

    def build(gens):
        try:
            SS = lift_foliation(F, ctx.lift_U, [gens])
        except Obstruction as exc:
            return exc
        prov = tuple(("S-structure generator", fs(w)) for w in SS.distribution.generators)
        res = residue(Xn, ctx.h, SS.distribution, glob, lifted_phi, provenance=prov)
        return SS, res

    built = pmap(build, proposals)
    for k, item in enumerate(built):
        if isinstance(item, Obstruction):
            raise Unmet(
                "obstruction",
                f"S-structure {k}: {item}",
                {"level": ctx.lift.level, "index": k, "residual": [fs(r) for r in item.residual],
                 "valuation": item.valuation},
            )
    residues = []
    for SS, res in built:
        entry = {"generators": [fs(w) for w in SS.distribution.generators], "witness": fmat(SS.distribution.alpha),
                 "witness_reduces": SS.witness_reduces}
        entry.update(_residue_json(res))
        entry["projection_is_phi_form"] = res.a == phi_form(glob, lifted_phi)
        residues.append(entry)
    first = built[0][1]

    def compare(k):
        dc = difference_class(built[k][1], first)
        return {
            "index": k,
            "against": 0,
            "a": fs(dc.a),
            "b": fs(dc.b),
            "status": dc.status,
            "primitive": None if dc.primitive is None else [fs(dc.primitive[0]), fs(dc.primitive[1])],
            "truncation": dc.N,
            "pole_order": dc.pole_order,
        }

    return {
        "level": ctx.lift.level,
        "lifted_ring": str(Xn.ring),
        "residues": residues,
        "differences": pmap(compare, range(1, len(built))),
    }


def cmd_validate_algebroid(ctx: Context) -> dict:
    F = ctx.distribution()
    rep = validate_algebroid(F)
    failed = [c.identity for c in rep.checks if not c.holds]
    if failed:
        raise InternalInconsistency(f"algebroid identities fail: {failed[:3]}")
    return {"distribution": distribution_json(F), "checks": len(rep.checks), "failed": failed, "ok": rep.ok}


HANDLERS: dict[str, Callable[[Context], dict]] = {
    "check-foliation": cmd_check_foliation,
    "foliated-cohomology": cmd_foliated_cohomology,
    "derham-cohomology": cmd_derham_cohomology,
    "chern": cmd_chern,
    "t1-check": cmd_t1_check,
    "bott-check": cmd_bott_check,
    "residue": cmd_residue,
    "crystalline-cohomology": cmd_crystalline_cohomology,
    "c4-check": cmd_c4_check,
    "crystalline-residue": cmd_crystalline_residue,
    "validate-algebroid": cmd_validate_algebroid,
}
assert set(HANDLERS) == set(COMMANDS)


# ---------------------------------------------------------------------------
# driver


def run_problem(data: dict, command: Optional[str] = None, truncate: Optional[int] = None,
                recheck: bool = False) -> tuple[dict, int]:
    """Run a parsed JSON problem; returns ``(report, exit status)``.

    Input errors raise :class:`InputError` (exit 2 is decided by the caller).
    """
    problem = parse_problem(data, command, truncate)
    echo = canonical_problem(problem)
    problem = parse_problem(echo)
    ctx = Context(problem)
    status, code, message, result = "ok", EXIT_OK, None, {}
    try:
        result = HANDLERS[problem.command](ctx)
    except Unmet as exc:
        status, code, message, result = exc.status, EXIT_UNMET, str(exc), exc.result
    except NotIntegrable as exc:
        status, code, message = "not-integrable", EXIT_UNMET, str(exc)
        result = {"residual": [fs(r) for r in exc.residual]}
    except NotTransversallySmooth as exc:
        status, code, message = "not-transversally-smooth", EXIT_UNMET, str(exc)
    except HypothesisUnmet as exc:
        status, code, message = "hypothesis-unmet", EXIT_UNMET, str(exc)
    ring = problem.ring
    level = ctx.lift.level if ctx.lift is not None else ring.n
    report = {
        "schema": 1,
        "command": problem.command,
        "status": status,
        "message": message,
        "problem": echo,
        "result": result,
        "provenance": {
            "tool": f"folcris {__version__}",
            "ring": str(ring),
            "level": level,
            "truncation": problem.task.get("truncate"),
            "determinism": DETERMINISM_NOTE,
        },
    }
    if recheck:
        from .recheck import recheck_report

        checks = recheck_report(report)
        report["recheck"] = [{"claim": c, "holds": ok} for c, ok in checks]
        if not all(ok for _, ok in checks):
            code = EXIT_INTERNAL
    return report, code


def render_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _render_text(value, indent: int, lines: list[str], key: Optional[str] = None):
    pad = "  " * indent
    label = f"{key}: " if key is not None else "- "
    if isinstance(value, dict):
        if not value:
            lines.append(f"{pad}{label}{{}}")
            return
        lines.append(f"{pad}{label.rstrip()}" if key is not None else f"{pad}-")
        for k in value:
            _render_text(value[k], indent + 1, lines, k)
    elif isinstance(value, list):
        if not value:
            lines.append(f"{pad}{label}[]")
            return
        if all(not isinstance(v, (dict, list)) for v in value):
            lines.append(f"{pad}{label}" + ", ".join(_scalar(v) for v in value))
            return
        lines.append(f"{pad}{label.rstrip()}")
        for v in value:
            _render_text(v, indent + 1, lines)
    else:
        lines.append(f"{pad}{label}{_scalar(value)}")


def _scalar(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "yes" if v else "no"
    return str(v)


def render_text(report: dict) -> str:
    head = f"folcris {report['command']}: {report['status']}"
    lines = [head]
    if report.get("message"):
        lines.append(f"  {report['message']}")
    for section in ("result", "recheck", "provenance", "problem"):
        if section in report:
            _render_text(report[section], 0, lines, section)
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="folcris", description="Foliated de Rham and crystalline computations.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("file", help="problem file (JSON), or - for stdin")
    ap.add_argument("--truncate", type=int, metavar="N", help="truncation bound (overrides task.truncate)")
    ap.add_argument("--format", choices=("text", "json"), default="text")
    ap.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
    ap.add_argument("--recheck", action="store_true", help="re-verify printed witnesses by form arithmetic")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        if args.file == "-":
            text = sys.stdin.read()
        else:
            with open(args.file, encoding="utf-8") as fh:
                text = fh.read()
    except OSError as exc:
        print(f"folcris: error: cannot read {args.file}: {exc.strerror}", file=sys.stderr)
        return EXIT_INPUT
    try:
        report, code = run_problem(load_json(text), args.command, args.truncate, args.recheck)
    except UsageError as exc:
        print(f"folcris: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InternalInconsistency as exc:
        print(f"folcris: internal inconsistency: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    out = render_json(report) if args.format == "json" else render_text(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
