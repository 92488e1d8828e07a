import json
import os
import subprocess
import sys

import pytest

from folcris.cli import main, render_json, run_problem
from folcris.gallery import GALLERY, problem
from folcris.problem import InputError, parse_problem
from folcris.recheck import recheck_report


def run_cli(tmp_path, capsys, data, *args, command=None, fmt="json"):
    path = tmp_path / "problem.json"
    path.write_text(json.dumps(data))
    command = command or data["task"]["command"]
    code = main([command, str(path), "--format", fmt, *args])
    out, err = capsys.readouterr()
    return code, out, err


def report_of(tmp_path, capsys, data, *args):
    code, out, err = run_cli(tmp_path, capsys, data, *args)
    return code, (json.loads(out) if out else None), err


# --- examples with known answers


def test_bott_check_on_the_plane(tmp_path, capsys):
    code, rep, _ = report_of(tmp_path, capsys, problem(7, "xy", "bott-check", foliation=["dy"], phi="X1^2"))
    assert code == 0 and rep["status"] == "ok"
    res = rep["result"]
    assert res["certificate"] == "phi_form = 0, F^-2 witness"
    assert res["phi_form"] == "0"
    assert (res["q"], res["d"]) == (2, 1)


def test_contact_form_is_not_integrable(tmp_path, capsys):
    code, rep, _ = report_of(tmp_path, capsys, problem(7, "xyz", "check-foliation", foliation=["dz + y*dx"]))
    assert code == 1
    assert rep["status"] == "not-integrable"
    assert rep["result"]["residual"] == ["-dx*dy"]


def test_foliated_cohomology_of_dy(tmp_path, capsys):
    data = problem(5, "xy", "foliated-cohomology", foliation=["dy"])
    code, rep, _ = report_of(tmp_path, capsys, data, "--truncate", "5")
    assert code == 0
    h0, h1 = rep["result"]["cohomology"][:2]
    assert h0["module"] == "(Z/5)^7"
    assert sorted(g["representative"] for g in h0["generators"]) == sorted(
        ["1", "y", "y^2", "y^3", "y^4", "y^5", "x^5"]
    )
    assert h1["module"] == "Z/5"
    assert [g["representative"] for g in h1["generators"]] == ["x^4*dx"]


def test_derham_over_z25_reports_torsion_witness(tmp_path, capsys):
    code, rep, _ = report_of(tmp_path, capsys, problem(5, "x", "derham-cohomology", n=2, truncate=5))
    assert code == 0
    h0 = rep["result"]["cohomology"][0]
    assert h0["free_rank"] == 1 and h0["torsion"] == [5]
    tors = [g for g in h0["generators"] if g["order"] == 5]
    assert tors and tors[0]["representative"] == "5*x^5"


# --- exit codes and input errors


@pytest.mark.parametrize(
    "mutate,path",
    [
        (lambda p: p["ring"].update(p=6), "ring"),
        (lambda p: p["task"].pop("truncate"), "task.truncate"),
        (lambda p: p["foliation"].update(generators=["dy +"]), "foliation.generators[0]"),
        (lambda p: p["foliation"].update(generators=["dq"]), "foliation.generators[0]"),
        (lambda p: p.update(extra=1), "extra"),
        (lambda p: p["task"].update(bogus=1), "task.bogus"),
        (lambda p: p.update(schema=2), "schema"),
        (lambda p: p["variety"].update(vars=["x", "x"]), "variety.vars"),
        (lambda p: p["task"].update(truncate="5"), "task.truncate"),
    ],
)
def test_input_errors_name_the_field(tmp_path, capsys, mutate, path):
    data = problem(5, "xy", "foliated-cohomology", foliation=["dy"], truncate=3)
    mutate(data)
    code, out, err = run_cli(tmp_path, capsys, data, command="foliated-cohomology")
    assert code == 2 and not out
    assert err.startswith(f"folcris: error: {path}")


def test_command_mismatch(tmp_path, capsys):
    code, _, err = run_cli(tmp_path, capsys, problem(7, "xy", "bott-check", foliation=["dy"], phi="X1^2"),
                           command="chern")
    assert code == 2 and "task.command" in err


def test_invalid_json_and_missing_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["chern", str(bad)]) == 2
    assert "invalid JSON" in capsys.readouterr().err
    assert main(["chern", str(tmp_path / "nope.json")]) == 2
    assert "cannot read" in capsys.readouterr().err


def test_unknown_command_is_input_error(capsys):
    assert main(["frobnicate", "x.json"]) == 2


@pytest.mark.parametrize("name", sorted(GALLERY))
def test_gallery_exit_codes_and_recheck(name, tmp_path, capsys):
    data, expected = GALLERY[name]
    code, out, err = run_cli(tmp_path, capsys, data, "--recheck")
    assert code == expected, err
    if expected == 2:
        assert err.startswith("folcris: error:") and not out
        return
    rep = json.loads(out)
    assert rep["recheck"], "recheck produced no claims"
    failed = [c["claim"] for c in rep["recheck"] if not c["holds"]]
    assert not failed


# --- echo, determinism, output options


@pytest.mark.parametrize("name", sorted(n for n, (_, e) in GALLERY.items() if e != 2))
def test_echo_round_trips(name):
    data, _ = GALLERY[name]
    rep, _ = run_problem(data)
    again, _ = run_problem(rep["problem"])
    assert again["problem"] == rep["problem"]
    assert render_json(again) == render_json(rep)


def test_parse_problem_does_not_mutate_input():
    data = problem(7, "xy", "chern", connection={"matrix": [["x*dy"]]}, phi="X1")
    before = json.dumps(data, sort_keys=True)
    parse_problem(data, truncate=3)
    assert json.dumps(data, sort_keys=True) == before


@pytest.mark.parametrize("name", ["a2-dy-f5/foliated-N5", "a4-crystalline-residue/lambda2", "a2-f5/derham-N3"])
def test_thread_count_does_not_change_bytes(name, monkeypatch):
    data, _ = GALLERY[name]
    outs = []
    for threads in ("1", "4", "1"):
        monkeypatch.setenv("FOLCRIS_THREADS", threads)
        outs.append(render_json(run_problem(data)[0]))
    assert outs[0] == outs[1] == outs[2]


def test_subprocess_runs_are_byte_identical(tmp_path):
    data, _ = GALLERY["a2-dy-f5/gr1-N3"]
    path = tmp_path / "p.json"
    path.write_text(json.dumps(data))
    outs = []
    for threads in ("1", "3"):
        env = dict(os.environ, FOLCRIS_THREADS=threads)
        proc = subprocess.run([sys.executable, "-m", "folcris.cli", "foliated-cohomology", str(path), "--format", "json"],
                              capture_output=True, env=env, check=True)
        outs.append(proc.stdout)
    assert outs[0] == outs[1]


def test_out_flag_and_text_format(tmp_path, capsys):
    data, _ = GALLERY["a2-dy/bott"]
    path = tmp_path / "p.json"
    path.write_text(json.dumps(data))
    target = tmp_path / "report.txt"
    assert main(["bott-check", str(path), "--out", str(target)]) == 0
    assert capsys.readouterr().out == ""
    text = target.read_text()
    assert text.startswith("folcris bott-check: ok\n")
    assert "certificate: phi_form = 0, F^-2 witness" in text


def test_stdin_input(monkeypatch, capsys):
    import io

    data, _ = GALLERY["a2-chern/rank2"]
    monkeypatch.setattr(sys, "stdin", io.StringIO(json.dumps(data)))
    assert main(["chern", "-", "--format", "json"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["command"] == "chern"


def test_tampered_report_fails_recheck():
    data, _ = GALLERY["a2-dy/bott"]
    rep, _ = run_problem(data)
    rep["result"]["chern"][0]["form"] = "x*dx*dy"
    assert not all(ok for _, ok in recheck_report(rep))


def test_input_error_is_a_usage_error():
    with pytest.raises(InputError):
        run_problem({"schema": 1})
