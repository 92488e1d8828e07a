"""Problem files: JSON documents describing one computation.

Example::

    {
      "schema": 1,
      "ring": {"p": 7, "n": 1},
      "variety": {"vars": ["x", "y"], "inverted": "x"},
      "foliation": {"generators": ["x*dy - 2*y*dx"], "certificate": ["y"]},
      "connection": "bott",
      "phi": "X1^2",
      "task": {"command": "bott-check"}
    }

``connection`` is ``"bott"`` or ``{"matrix": [[...]]}``. Task options:
``truncate``, ``index``, ``filtration_level``, ``open_locus``, ``level``,
``adapted`` and ``s_structure`` (``{"lift": "verbatim" | "proposal", "n": 2,
"generators": [...], "alternatives": [[...], ...]}``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Optional

from .forms import Form
from .poly import PresentationRejected, VarietyPresentation, format_terms
from .syntax import SyntaxProblem, check_var_names, format_form, parse_form, parse_plain_poly
from .zmod import RingDescriptor, UsageError

SCHEMA_VERSION = 1

COMMANDS = (
    "check-foliation",
    "foliated-cohomology",
    "derham-cohomology",
    "chern",
    "t1-check",
    "bott-check",
    "residue",
    "crystalline-cohomology",
    "c4-check",
    "crystalline-residue",
    "validate-algebroid",
)

_TOP_KEYS = {"schema", "ring", "variety", "foliation", "connection", "phi", "task", "name", "description"}
_TASK_KEYS = {"command", "truncate", "index", "filtration_level", "open_locus", "level", "adapted", "s_structure"}


class InputError(UsageError):
    """Malformed problem file; the message names the offending field."""


def _fail(path: str, msg: str):
    raise InputError(f"{path}: {msg}")


def _get(obj: dict, key: str, path: str, kind=None, required=True, default=None):
    if key not in obj:
        if required:
            _fail(f"{path}.{key}" if path else key, "missing")
        return default
    val = obj[key]
    if kind is not None and not isinstance(val, kind) or isinstance(val, bool) and kind is int:
        name = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
        _fail(f"{path}.{key}" if path else key, f"expected {name}, got {type(val).__name__}")
    return val


def load_json(text: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise InputError("top level must be an object")
    return data


def parse_form_at(pres: VarietyPresentation, text: Any, path: str) -> Form:
    if not isinstance(text, str):
        _fail(path, f"expected a string, got {type(text).__name__}")
    try:
        return parse_form(pres, text)
    except SyntaxProblem as exc:
        _fail(path, str(exc))
    except UsageError as exc:
        _fail(path, str(exc))


def parse_forms(pres, items, path) -> list[Form]:
    if not isinstance(items, list):
        _fail(path, "expected a list")
    return [parse_form_at(pres, t, f"{path}[{i}]") for i, t in enumerate(items)]


def parse_matrix(pres, rows, path) -> list[list[Form]]:
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        _fail(path, "expected a list of lists")
    return [parse_forms(pres, r, f"{path}[{i}]") for i, r in enumerate(rows)]


@dataclass
class Problem:
    """A validated problem; presentations are built on demand."""

    data: dict
    command: str
    ring: RingDescriptor
    X: VarietyPresentation

    # -- accessors with validation
    @property
    def task(self) -> dict:
        return self.data.get("task", {})

    def option(self, key: str, kind=int, default=None):
        return _get(self.task, key, "task", kind, required=False, default=default)

    def require(self, key: str, kind=int):
        return _get(self.task, key, "task", kind, required=True)

    def polynomial(self, text: Any, path: str, pres: Optional[VarietyPresentation] = None) -> dict:
        pres = pres or self.X
        if not isinstance(text, str):
            _fail(path, "expected a polynomial string")
        try:
            return parse_plain_poly(pres.ring, pres.vars, text)
        except UsageError as exc:
            _fail(path, str(exc))

    def open_locus(self, pres: Optional[VarietyPresentation] = None) -> dict:
        return self.polynomial(self.require("open_locus", str), "task.open_locus", pres)

    def localize(self, pres: VarietyPresentation, h: dict) -> VarietyPresentation:
        try:
            return pres.localize(h)
        except PresentationRejected as exc:
            _fail("task.open_locus", str(exc))

    def foliation_block(self) -> dict:
        return _get(self.data, "foliation", "", dict)

    def foliation_data(self, pres: VarietyPresentation):
        """(generators, certificate indices or None, witness or None) over ``pres``."""
        block = self.foliation_block()
        gens = parse_forms(pres, _get(block, "generators", "foliation", list), "foliation.generators")
        cert = block.get("certificate")
        if cert is not None:
            if not isinstance(cert, list) or not all(isinstance(c, str) for c in cert):
                _fail("foliation.certificate", "expected a list of variable names")
            for c in cert:
                if c not in pres.vars:
                    _fail("foliation.certificate", f"unknown variable {c!r}")
            cert = [pres.vars.index(c) for c in cert]
        witness = block.get("witness")
        if witness is not None:
            witness = parse_matrix(pres, witness, "foliation.witness")
        return gens, cert, witness

    def connection_entry(self, key: str = "connection", where: Optional[dict] = None):
        src = self.data if where is None else where
        path = key if where is None else f"task.{key}"
        entry = src.get(key, "bott" if key in ("connection", "adapted") else None)
        if entry == "bott":
            return "bott"
        if isinstance(entry, dict) and "matrix" in entry:
            return entry["matrix"], f"{path}.matrix"
        _fail(path, 'expected "bott" or {"matrix": [[...]]}')

    def phi_text(self) -> str:
        return _get(self.data, "phi", "", str)


def _build_presentation(data: dict) -> tuple[RingDescriptor, VarietyPresentation]:
    ring_block = _get(data, "ring", "", dict)
    p = _get(ring_block, "p", "ring", int)
    n = _get(ring_block, "n", "ring", int, required=False, default=1)
    try:
        ring = RingDescriptor(p, n)
    except (UsageError, ValueError) as exc:
        _fail("ring", str(exc))
    var_block = _get(data, "variety", "", dict)
    names = _get(var_block, "vars", "variety", list)
    if not names or not all(isinstance(v, str) for v in names):
        _fail("variety.vars", "expected a non-empty list of names")
    bad = check_var_names(names) or (len(set(names)) != len(names) and "duplicate variable names")
    if bad:
        _fail("variety.vars", bad)
    inverted = var_block.get("inverted")
    try:
        h = None
        if inverted is not None:
            if not isinstance(inverted, str):
                _fail("variety.inverted", "expected a polynomial string")
            try:
                h = parse_plain_poly(ring, names, inverted)
            except UsageError as exc:
                _fail("variety.inverted", str(exc))
        X = VarietyPresentation.create(ring, names, h)
    except PresentationRejected as exc:
        _fail("variety", str(exc))
    return ring, X


def parse_problem(data: dict, command: Optional[str] = None, truncate: Optional[int] = None) -> Problem:
    schema = data.get("schema")
    if schema != SCHEMA_VERSION:
        _fail("schema", f"expected {SCHEMA_VERSION}, got {schema!r}")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        _fail(sorted(unknown)[0], "unknown key")
    task = _get(data, "task", "", dict, required=False, default={})
    unknown = set(task) - _TASK_KEYS
    if unknown:
        _fail(f"task.{sorted(unknown)[0]}", "unknown key")
    file_cmd = task.get("command")
    if command is None:
        command = file_cmd
    elif file_cmd is not None and file_cmd != command:
        _fail("task.command", f"file requests {file_cmd!r} but {command!r} was invoked")
    if command not in COMMANDS:
        _fail("task.command", f"unknown command {command!r}")
    data = json.loads(json.dumps(data))
    data.setdefault("task", {})["command"] = command
    if truncate is not None:
        data["task"]["truncate"] = truncate
    ring, X = _build_presentation(data)
    return Problem(data, command, ring, X)


def echo(problem: Problem, replacements: dict) -> dict:
    """Problem data with forms and polynomials in canonical printed form."""
    out = json.loads(json.dumps(problem.data))
    for path, value in replacements.items():
        node = out
        keys = path.split(".")
        for k in keys[:-1]:
            node = node.setdefault(k, {})
        node[keys[-1]] = value
    return out


def canonical_forms(forms) -> list[str]:
    return [format_form(f) for f in forms]


def canonical_poly(terms: dict, pres: VarietyPresentation) -> str:
    return format_terms(terms, pres)
