import csv
import io
import json
import subprocess
import sys
import time

import numpy as np
import pytest

from qfvm.cli import main
from qfvm.mesh import generate_structured, read_mesh, write_mesh


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# ------------------------------------------------------------------ params


def test_params_alpha(capsys):
    code, out, _ = run(capsys, "params", "--alpha", "0.1")
    assert code == 0
    assert "beta          0.57226495" in out
    assert "gamma         0.0506673117" in out
    assert "[orthogonal]" in out


def test_params_json(capsys):
    code, out, _ = run(capsys, "params", "--scheme", "qfvs2", "--json")
    d = json.loads(out)
    assert code == 0 and d["orthogonality"] == "orthogonal"
    assert d["vstar_tabulated"] == 17.0
    assert d["lambda_range"][0] < d["lam"] < d["lambda_range"][1]


def test_params_surface_only(capsys):
    code, out, _ = run(capsys, "params", "--scheme", "qfvs4")
    assert code == 0 and "[surface-only]" in out


def test_params_non_orthogonal(capsys):
    code, out, _ = run(capsys, "params", "--alpha", "0.3", "--beta", "0.4", "--gamma", "0.25")
    assert code == 0 and "[non-orthogonal]" in out


@pytest.mark.parametrize("argv", [
    ("params", "--alpha", "0.05"),
    ("params", "--scheme", "qfvs9"),
    ("params", "--alpha", "0.2", "--beta", "0.3"),
    ("params", "--alpha", "abc"),
    ("nosuch",),
    ("params", "--threads", "0"),
])
def test_params_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err


# ------------------------------------------------------------------ mesh/audit


def test_mesh_and_audit_roundtrip(capsys, tmp_path):
    path = tmp_path / "m.txt"
    code, out, _ = run(capsys, "mesh", "--structured", "2", "-o", str(path))
    assert code == 0 and "48 tets" in out
    assert read_mesh(path).n_tets == 48
    code, out, _ = run(capsys, "audit", "--mesh", str(path))
    assert code == 0 and "min V-angle       25.528779 deg" in out


def test_audit_structured_n4(capsys):
    code, out, _ = run(capsys, "audit", "--structured", "4", "--json")
    d = json.loads(out)
    assert code == 0
    assert d["min_vangle_degrees"] == pytest.approx(25.5288, abs=5e-5)
    assert sum(d["histogram"]["counts"]) == 384


def test_audit_scheme_threshold(capsys):
    # structured meshes sit above v* + 0.5 for QFVS-1 (20.5 + 0.5)
    code, out, _ = run(capsys, "audit", "--structured", "2", "--scheme", "qfvs1")
    assert code == 0 and "threshold 21 deg: PASS" in out
    code, out, _ = run(capsys, "audit", "--structured", "2", "--threshold", "30")
    assert code == 1 and "FAIL" in out and "offending elements (48)" in out


def test_audit_unknown_vstar(capsys):
    code, _, err = run(capsys, "audit", "--structured", "1", "--alpha", "0.2")
    assert code == 2 and "--vstar" in err
    code, out, _ = run(capsys, "audit", "--structured", "1", "--alpha", "0.2", "--vstar", "10")
    assert code == 0 and "threshold 10.5 deg" in out


@pytest.mark.parametrize("argv,match", [
    (("audit", "--structured", "0"), "N >= 1"),
    (("audit", "--structured", "2", "--perturb", "-1"), "non-negative"),
    (("audit", "--mesh", "x.txt", "--perturb", "0.2"), "structured meshes only"),
])
def test_mesh_usage_errors(capsys, argv, match):
    code, _, err = run(capsys, *argv)
    assert code == 2 and match in err


def test_mesh_missing_source(capsys):
    code, _, _ = run(capsys, "audit")
    assert code == 2


def test_bad_mesh_file(capsys, tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("garbage\n")
    code, _, err = run(capsys, "audit", "--mesh", str(p))
    assert code == 2 and "line 1" in err


# ------------------------------------------------------------------ solve


def test_solve_single_dof(capsys, tmp_path):
    out_path = tmp_path / "u.txt"
    code, out, _ = run(capsys, "solve", "--structured", "1", "--scheme", "qfvs1",
                       "-o", str(out_path))
    assert code == 0
    assert "free 1" in out
    assert "u(0.5, 0.5, 0.5) = 0.88121724579054" in out
    data = np.loadtxt(out_path)
    assert data.shape == (27, 4)


def test_solve_json_and_lu(capsys):
    code, out, _ = run(capsys, "solve", "--structured", "2", "--method", "lu",
                       "--case", "poisson-sine", "--json")
    d = json.loads(out)
    assert code == 0 and d["solver"]["method"] == "lu" and d["n_free"] == 27
    assert d["h1_error"] > d["l2_error"] > 0


def test_solve_bad_rtol(capsys):
    code, _, _ = run(capsys, "solve", "--structured", "1", "--rtol", "2")
    assert code == 2


def test_solve_solver_failure_exit_1(capsys, monkeypatch):
    import qfvm.cli as cli
    from qfvm.exceptions import SolverError

    def boom(*a, **k):
        raise SolverError("diverged")

    monkeypatch.setattr(cli, "solve", boom)
    code, _, err = run(capsys, "solve", "--structured", "1")
    assert code == 1 and "diverged" in err


def test_solve_mesh_file(capsys, tmp_path):
    m = generate_structured(1)
    p = tmp_path / "c.txt"
    write_mesh(m, p)
    code, out, _ = run(capsys, "solve", "--mesh", str(p))
    assert code == 0 and "u(0.5, 0.5, 0.5)" in out


# ------------------------------------------------------------------ convergence


def test_convergence_csv(capsys, tmp_path):
    code, out, _ = run(capsys, "convergence", "--scheme", "qfvs1,qfvs4", "--structured", "2,3",
                       "--case", "poisson-sine", "--outdir", str(tmp_path), "--json")
    assert code == 0
    for name in ("qfvs1", "qfvs4"):
        text = (tmp_path / f"{name}.csv").read_text()
        rows = list(csv.reader(io.StringIO(text)))
        assert rows[0] == ["N", "h", "h1_error", "h1_order", "l2_error", "l2_order"]
        assert [r[0] for r in rows[1:]] == ["2", "3"]
        assert rows[1][3] == "" and "e" in rows[2][3]
        assert "\r" not in text
        assert json.loads((tmp_path / f"{name}.json").read_text())["scheme"] == name
    payload = json.loads(out)
    assert [p["scheme"] for p in payload] == ["qfvs1", "qfvs4"]


def test_convergence_audit_failure(capsys):
    code, out, err = run(capsys, "convergence", "--structured", "1", "--perturb", "0.2",
                         "--audit", "--vstar", "30")
    assert code == 1
    assert "below V-angle 30.5" in err and "first:" in err


def test_convergence_bad_scheme(capsys):
    code, _, _ = run(capsys, "convergence", "--scheme", "qfvs7", "--structured", "2")
    assert code == 2
    code, _, _ = run(capsys, "convergence", "--structured", "0")
    assert code == 2


# ------------------------------------------------------------------ vstar


def test_vstar_smoke(capsys, tmp_path):
    path = tmp_path / "v.csv"
    t = time.perf_counter()
    code, out, _ = run(capsys, "vstar", "--scheme", "qfvs1", "--primes", "3,5",
                       "--precision", "5", "-o", str(path))
    assert time.perf_counter() - t < 10.0
    assert code == 0
    rows = list(csv.reader(io.StringIO(path.read_text())))
    assert rows[0] == ["lambda", "vstar_degrees", "primes", "precision", "wallclock"]
    assert rows[1][2] == "3;5"
    assert float(rows[1][0]) == pytest.approx(1.20726, rel=1e-5)
    assert out == path.read_text()


def test_vstar_trims_with_warning(capsys):
    code, out, err = run(capsys, "vstar", "--lambdas", "0.1,1.0,5", "--primes", "3",
                         "--precision", "5", "--json")
    assert code == 0
    assert "warning: dropping lambda values" in err
    assert [r["lambda"] for r in json.loads(out)["rows"]] == [1.0]


def test_vstar_grid(capsys):
    code, out, _ = run(capsys, "vstar", "--lambda-step", "0.5", "--lambda-span", "0.5",
                       "--primes", "3", "--precision", "5")
    assert code == 0
    assert len(out.strip().splitlines()) == 1 + 3


@pytest.mark.parametrize("argv", [
    ("vstar", "--lambdas", "5"),
    ("vstar", "--primes", "5,3"),
    ("vstar", "--precision", "0"),
    ("vstar", "--scheme", "qfvs1", "--alpha", "0.3", "--beta", "0.3", "--gamma", "0.2"),
])
def test_vstar_errors(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


# ------------------------------------------------------------------ element


def test_element_regular(capsys):
    code, out, _ = run(capsys, "element", "--scheme", "qfvs1")
    assert code == 0
    assert out.rstrip().endswith("\nstable")
    assert "admissible lambda range (0.479490, 3.039651)" in out
    for label in ("A =", "A_{K,1} =", "A_{K,lam} =", "B_bar =", "N ="):
        assert label in out


def test_element_unstable_lambda(capsys):
    code, out, _ = run(capsys, "element", "--scheme", "qfvs1", "--lambda", "3.1")
    assert code == 0 and out.rstrip().endswith("not stable")


def test_element_json_custom_tet(capsys):
    code, out, _ = run(capsys, "element", "--tet", "0,0,0;1,0,0;0,1,0;0,0,1", "--json")
    d = json.loads(out)
    assert code == 0 and np.array(d["A_K1"]).shape == (10, 10)
    assert d["volume"] == pytest.approx(1 / 6)


@pytest.mark.parametrize("tet", ["0,0,0;1,0,0;0,1,0", "a,b,c;1,0,0;0,1,0;0,0,1",
                                 "0,0,0;1,0,0;0,1,0;1,1,0"])
def test_element_bad_tet(capsys, tet):
    code, _, _ = run(capsys, "element", "--tet", tet)
    assert code == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "qfvm", "params", "--scheme", "qfvs3"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and "alpha         0.4" in res.stdout
    res = subprocess.run([sys.executable, "-m", "qfvm"], capture_output=True, text=True)
    assert res.returncode == 2
