import json
import math

import numpy as np
import pytest

from qfvm.convergence import (
    CASES,
    ConvergenceReport,
    ConvergenceRow,
    error_norms,
    get_case,
    interpolate,
    mesh_family,
    run_convergence,
)
from qfvm.exceptions import QFVMError
from qfvm.mesh import generate_structured
from qfvm.scheme import preset


def _fd_rhs(case, x, h=1e-4):
    # -div(kappa grad u) by central differences of the flux
    out = np.zeros(len(x))
    for d in range(3):
        e = np.zeros(3)
        e[d] = h / 2
        fp = case.kappa(x + e) * case.grad(x + e)[..., d]
        fm = case.kappa(x - e) * case.grad(x - e)[..., d]
        out -= (fp - fm) / h
    return out


@pytest.mark.parametrize("name", sorted(CASES))
def test_case_consistency(name, rng):
    case = get_case(name)
    x = rng.random((50, 3))
    assert case.f(x) == pytest.approx(_fd_rhs(case, x), rel=1e-6, abs=1e-5)
    h = 1e-6
    for d in range(3):
        e = np.zeros(3)
        e[d] = h
        fd = (case.u(x + e) - case.u(x - e)) / (2 * h)
        assert case.grad(x)[:, d] == pytest.approx(fd, rel=1e-6, abs=1e-8)
    b = np.array([[0.0, 0.3, 0.7], [1.0, 0.2, 0.1], [0.5, 0.5, 1.0]])
    assert case.u(b) == pytest.approx(np.zeros(3), abs=1e-15)


def test_case_kappa_arg():
    assert get_case("poisson-sine").kappa_arg == 1.0
    assert callable(get_case("exp-kappa-sine").kappa_arg)
    with pytest.raises(QFVMError):
        get_case("nope")


def test_zero_field_norms():
    m = generate_structured(4)
    h1, l2 = error_norms(m, np.zeros(m.n_nodes), "exp-kappa-sine")
    assert l2 == pytest.approx(math.sqrt(1 / 8), rel=1e-4)
    assert h1 == pytest.approx(math.sqrt(3 * math.pi**2 / 8), rel=1e-4)


def test_quadratics_are_exact():
    # quadratic u is reproduced exactly by its interpolant
    from qfvm.convergence import ManufacturedCase

    u = lambda x: x[..., 0] ** 2 - x[..., 1] * x[..., 2] + 0.5 * x[..., 0]
    g = lambda x: np.stack([2 * x[..., 0] + 0.5, -x[..., 2], -x[..., 1]], axis=-1)
    case = ManufacturedCase("quad", u, g, lambda x: 1.0, lambda x: 0.0)
    m = generate_structured(2)
    h1, l2 = error_norms(m, interpolate(m, u), case)
    assert h1 < 1e-13 and l2 < 1e-14


def test_interpolation_orders():
    errs = []
    for N in (4, 8):
        m = generate_structured(N)
        errs.append(error_norms(m, interpolate(m, get_case("exp-kappa-sine").u), "exp-kappa-sine"))
    (h1a, l2a), (h1b, l2b) = errs
    assert math.log2(h1a / h1b) == pytest.approx(2.0, abs=0.15)
    assert math.log2(l2a / l2b) == pytest.approx(3.0, abs=0.15)


def test_error_norms_shape():
    m = generate_structured(1)
    with pytest.raises(ValueError):
        error_norms(m, np.zeros(3), "exp-kappa-sine")


def test_mesh_family():
    assert mesh_family(2).n_tets == 48
    a = mesh_family(3, 0.2, seed=5)
    b = mesh_family(3, 0.2, seed=5)
    assert np.array_equal(a.vertices, b.vertices)
    assert np.abs(a.vertices - generate_structured(3).vertices).max() <= 0.2 / 3


def test_run_convergence_small(tmp_path):
    msgs = []
    rep = run_convergence(preset("qfvs1"), [2, 4], case="poisson-sine", log=msgs.append)
    assert rep.ok and len(rep.rows) == 2 and len(msgs) == 2
    r2, r4 = rep.row(2), rep.row(4)
    assert math.isnan(r2.h1_order) and math.isnan(r2.l2_order)
    assert r4.h1_order == pytest.approx(math.log(r2.h1_error / r4.h1_error) / math.log(2))
    assert r4.h1_error < r2.h1_error and r4.l2_error < r2.l2_error
    assert r4.min_vangle == pytest.approx(25.52878, abs=1e-5)
    with pytest.raises(KeyError):
        rep.row(3)

    text = rep.to_csv(tmp_path / "c.csv")
    lines = text.splitlines()
    assert lines[0] == "N,h,h1_error,h1_order,l2_error,l2_order"
    assert lines[1].startswith("2,") and ",," in lines[1]
    for tok in lines[2].split(",")[1:]:
        assert "e" in tok and len(tok.split("e")[0].replace("-", "").replace(".", "")) == 6
    assert (tmp_path / "c.csv").read_text() == text

    data = json.loads(rep.to_json())
    assert data["scheme"] == "qfvs1" and data["case"] == "poisson-sine"
    assert data["rows"][0]["h1_order"] is None
    assert data["rows"][1]["l2_error"] == r4.l2_error


def test_run_convergence_threshold_failure():
    rep = run_convergence(preset("qfvs2"), [1, 2], vangle_threshold=30.0)
    assert not rep.ok
    assert all("below V-angle 30" in r.error for r in rep.rows)
    assert rep.to_csv().count("\n") == 3


def test_failed_row_has_no_values():
    rep = ConvergenceReport("x", "y", "z", [ConvergenceRow(2, 0.5, error="boom")])
    assert not rep.ok
    assert math.isnan(rep.records()[0]["h1_error"])
    assert rep.to_csv().splitlines()[1] == "2,5.00000e-01,,,,"


def test_perturbed_family_runs():
    rep = run_convergence(preset("qfvs3"), [2, 3], perturb_rate=0.2, seed=7)
    assert rep.ok
    assert rep.family == "perturbed(0.2/N, seed=7)"
    assert rep.row(3).min_vangle < 25.5


def test_fvm_close_to_interpolant():
    # at moderate N the scheme error is comparable with interpolation error
    p = preset("qfvs1")
    rep = run_convergence(p, [4], case="poisson-sine")
    m = generate_structured(4)
    h1i, l2i = error_norms(m, interpolate(m, get_case("poisson-sine").u), "poisson-sine")
    r = rep.row(4)
    assert 0.8 * h1i < r.h1_error < 1.5 * h1i
