"""The ``hil`` command line front-end, driven through ``main(argv)``."""

from __future__ import annotations

import csv
import dataclasses
import io
import json

import pytest

from hil import cli
from hil.errors import SolverStall

SPHERE = ["--surface", "sphere:n=3"]


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_verify_sphere_equality(capsys):
    code, out, err = run(["verify", "--inequality", "carron_improved", *SPHERE, "--testfn", "constant"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["schema"] == "hil/1"
    (rep,) = doc["reports"]
    assert rep["lhs"] == pytest.approx(rep["rhs"], rel=1e-10)
    assert rep["surface"]["fingerprint"]
    assert "tolerance=" in err


def test_verify_large_exponent_below_n(capsys):
    argv = ["verify", "--inequality", "hardy_ibp", *SPHERE, "--testfn", "constant", "--p", "2", "--a", "2.9"]
    assert run(argv, capsys)[0] == 0


def test_verify_exponent_out_of_range(capsys):
    argv = ["verify", "--inequality", "hardy_ibp", *SPHERE, "--testfn", "constant", "--a", "3"]
    code, _, err = run(argv, capsys)
    assert code == 1
    assert "ExponentOutOfRange" in err


def test_bad_flag_is_named(capsys):
    argv = ["verify", "--inequality", "hardy_ibp", *SPHERE, "--testfn", "constant", "--p", "x"]
    code, _, err = run(argv, capsys)
    assert code == 1
    assert "--p" in err


def test_unknown_surface(capsys):
    code, _, err = run(["verify", "--inequality", "hardy_ibp", "--surface", "klein_bottle",
                        "--testfn", "constant"], capsys)
    assert code == 1
    assert "input error" in err


def test_json_is_byte_identical(tmp_path, capsys):
    argv = ["verify", "--inequality", "hardy_ibp", "--surface", "icosphere:subdiv=3",
            "--testfn", "random_bump:seed=4,count=3", "--p", "2", "--a", "1"]
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    assert run(argv + ["--out", str(first)], capsys)[0] == 0
    assert run(argv + ["--out", str(second)], capsys)[0] == 0
    assert first.read_bytes() == second.read_bytes()


def test_workers_do_not_change_output(monkeypatch, capsys):
    argv = ["verify", "--inequality", "hardy_ibp", *SPHERE, "--testfn", "radial_bump:delta=0.2,R=1.5",
            "--a", "1", "--family-param", "delta=0.1,0.3,0.5,0.7"]
    monkeypatch.setenv("HIL_WORKERS", "1")
    serial = run(argv, capsys)[1]
    monkeypatch.setenv("HIL_WORKERS", "4")
    parallel = run(argv, capsys)[1]
    assert serial == parallel
    assert [r["param"] for r in json.loads(serial)["reports"]] == [f"delta={d}" for d in ("0.1", "0.3", "0.5", "0.7")]


def test_verify_csv(capsys):
    argv = ["verify", "--inequality", "carron", *SPHERE, "--testfn", "constant", "--format", "csv"]
    code, out, _ = run(argv, capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 1 and float(rows[0]["rhs"]) >= float(rows[0]["lhs"])


def test_violation_exit_code(monkeypatch, capsys):
    real = cli.evaluate

    def failing(*args, **kw):
        return dataclasses.replace(real(*args, **kw), verdict="fail")

    monkeypatch.setattr(cli, "evaluate", failing)
    argv = ["verify", "--inequality", "carron", *SPHERE, "--testfn", "constant"]
    assert run(argv, capsys)[0] == 2


def test_sharpness_sphere_single_row(capsys):
    code, out, _ = run(["sharpness", "--inequality", "carron_improved", *SPHERE], capsys)
    assert code == 0
    (row,) = list(csv.DictReader(io.StringIO(out)))
    assert float(row["lambda_min"]) == pytest.approx(1.0, abs=1e-6)


def test_sharpness_carron_sweep(capsys):
    argv = ["sharpness", "--inequality", "carron", "--surface", "flat_annulus:n=3,R0=0.1,R1=1",
            "--family-param", "R0=1e-1,1e-2,1e-3,1e-4"]
    code, out, _ = run(argv, capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert tuple(rows[0]) == ("surface", "inequality", "p", "a", "param", "lambda_min", "iterations")
    lams = [float(r["lambda_min"]) for r in rows]
    assert len(lams) == 4 and all(x > y for x, y in zip(lams, lams[1:]))
    assert min(lams) >= 1 - 1e-6


def test_sharpness_non_quadratic(capsys):
    code, _, err = run(["sharpness", "--inequality", "hardy_ibp", "--surface", "icosphere:subdiv=2",
                        "--basis", "mesh", "--p", "3"], capsys)
    assert code == 1
    assert "NonQuadratic" in err


def test_sharpness_solver_failure(monkeypatch, capsys):
    def stall(*args, **kw):
        raise SolverStall("no convergence")

    monkeypatch.setattr(cli, "min_generalized_rayleigh", stall)
    assert run(["sharpness", "--inequality", "carron", *SPHERE], capsys)[0] == 3
