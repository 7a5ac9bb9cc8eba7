import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qfvm.exceptions import ParameterError
from qfvm.scheme import (
    ALPHA_MAX,
    ALPHA_MIN,
    PRESETS,
    SchemeParams,
    default_lambda,
    lambda_range,
    mapping_matrix_S,
    orthogonality_residuals,
    preset,
    scheme_constants,
    solve_orthogonal,
    t_integrals,
)

SQ3 = math.sqrt(3.0)
TABLE = {
    "qfvs1": (0.1, 14 / 15 - 2 * math.sqrt(66) / 45, 0.050667311760225),
    "qfvs2": (0.5 - SQ3 / 6, 2 / 3 + SQ3 / 9 - math.sqrt(21 + 6 * SQ3) / 9, 0.052883196779577),
    "qfvs3": (0.4, 11 / 15 - math.sqrt(714) / 45, 0.051085694878555),
    "qfvs4": (0.5 - SQ3 / 6, 2 / 3 + SQ3 / 9 - math.sqrt(21 + 6 * SQ3) / 9, 0.25),
}


def test_alpha_interval_endpoints():
    assert ALPHA_MIN == pytest.approx(0.091752, abs=5e-7)
    assert ALPHA_MAX == 0.5


@pytest.mark.parametrize("name", ["qfvs1", "qfvs2", "qfvs3"])
def test_solve_orthogonal_matches_table(name):
    a, b, g = TABLE[name]
    beta, gamma = solve_orthogonal(a)
    assert beta == pytest.approx(b, abs=1e-12)
    assert gamma == pytest.approx(g, abs=1e-12)


def test_qfvs3_printed_beta_is_inadmissible():
    # the alternative reading 11/15 - 2 sqrt(714)/45 is negative
    assert 11 / 15 - 2 * math.sqrt(714) / 45 < 0
    beta, _ = solve_orthogonal(0.4)
    assert beta == pytest.approx(11 / 15 - math.sqrt(714) / 45, abs=1e-14)


@pytest.mark.parametrize("name", sorted(TABLE))
def test_presets(name):
    p = preset(name)
    assert (p.alpha, p.beta, p.gamma) == pytest.approx(TABLE[name], abs=1e-12)
    assert p.lam == pytest.approx(1 / (1 - 3 * p.alpha * p.beta))
    assert preset(name.upper().replace("QFVS", "QFVS-")).gamma == p.gamma


@pytest.mark.parametrize("name,volume_zero", [("qfvs1", True), ("qfvs2", True),
                                              ("qfvs3", True), ("qfvs4", False)])
def test_orthogonality_residuals(name, volume_zero):
    s, v = orthogonality_residuals(*PRESETS[name])
    assert abs(s) < 1e-14
    assert (abs(v) < 1e-14) == volume_zero


@settings(max_examples=60, deadline=None)
@given(st.floats(ALPHA_MIN + 1e-6, ALPHA_MAX - 1e-6))
def test_solve_orthogonal_property(alpha):
    beta, gamma = solve_orthogonal(alpha)
    assert 0 < beta < 2 / 3 and 0 < gamma < 0.75
    s, v = orthogonality_residuals(alpha, beta, gamma)
    assert abs(s) < 1e-13 and abs(v) < 1e-13
    # surface constant s* vanishes together with the surface residual
    assert abs(scheme_constants(SchemeParams(alpha, beta, gamma, 1.0)).s_star) < 1e-13


@pytest.mark.parametrize("alpha", [0.05, ALPHA_MIN, 0.5, 0.7, -0.1])
def test_solve_orthogonal_rejects(alpha):
    with pytest.raises(ParameterError):
        solve_orthogonal(alpha)


@pytest.mark.parametrize("args", [(0.0, 0.3, 0.2), (0.5, 0.3, 0.2), (0.2, 0.7, 0.2),
                                  (0.2, 0.3, 0.75), (0.2, 0.3, 0.2, 0.0),
                                  (0.2, 0.3, 0.2, float("nan"))])
def test_params_validation(args):
    with pytest.raises(ParameterError):
        SchemeParams(*args)


def test_unknown_preset():
    with pytest.raises(ParameterError):
        preset("qfvs9")


def test_t_integrals_reference_values():
    # t-constants of QFVS-1, frozen from an independent evaluation
    t = t_integrals(*PRESETS["qfvs1"][:2])
    assert t == pytest.approx((2.2201353319908e-02, 3.205947334895e-03,
                               6.1131980013425e-02, 1.5789458650119e-02), rel=1e-12)


def test_t_integrals_by_quadrature():
    # t_i as integrals of L1 over face dual regions (reference face, area 1/2)
    from qfvm.dual import face_partition_2d
    from qfvm.quadrature import triangle_rule

    a, b, g = PRESETS["qfvs1"]
    bq, wq = triangle_rule(2)
    moments = {}
    for owner, poly in face_partition_2d(3, (a, b, g)):
        tot = 0.0
        for i in range(1, len(poly) - 1):
            T = poly[[0, i, i + 1]]
            e1, e2 = T[1] - T[0], T[2] - T[0]
            area = 0.5 * abs(e1[0] * e2[1] - e1[1] * e2[0])
            L = bq @ T
            tot += area * np.sum(wq * L[:, 0])
        moments[owner] = tot
    # face T4 has vertices P1 P2 P3; t1..t4: cells of P1, P2, M12, M23
    got = np.array([moments[0], moments[1], moments[6], moments[4]])
    assert got == pytest.approx(t_integrals(a, b), abs=1e-14)


def test_lambda_range_roots():
    for name in PRESETS:
        a, b, _ = PRESETS[name]
        lo, hi = lambda_range(a, b)
        _, _, t3, t4 = t_integrals(a, b)
        q = lambda lam: -3 * (2 * t3 + t4) ** 2 * lam**2 + (2 * t3 + 5 * t4) * lam - 1 / 12
        assert abs(q(lo)) < 1e-14 and abs(q(hi)) < 1e-14
        assert lo < 1.0 < default_lambda(a, b) < hi


def test_lambda_range_qfvs1_value():
    lo, hi = lambda_range(*PRESETS["qfvs1"][:2])
    # printed interval (0.479525, 3.039779); the quadratic's roots differ in
    # the fifth significant digit
    assert lo == pytest.approx(0.47949, abs=5e-6)
    assert hi == pytest.approx(3.03965, abs=5e-6)
    assert lo == pytest.approx(0.479525, rel=1e-4)
    assert hi == pytest.approx(3.039779, rel=1e-4)


@pytest.mark.parametrize("lam", [1.0, 0.5, 1.3, -2.0])
def test_mapping_matrix(lam):
    S = mapping_matrix_S(lam)
    assert np.ones(10) @ S == pytest.approx(np.ones(10))
    assert np.diag(S)[4:] == pytest.approx([lam] * 6)
    if lam == 1.0:
        assert np.array_equal(S, np.eye(10))


def test_mapping_matrix_zero():
    with pytest.raises(ParameterError):
        mapping_matrix_S(0.0)


def test_scheme_constants_relations():
    p = preset("qfvs1", lam=1.0)
    c = scheme_constants(p)
    assert c.s1 == pytest.approx(c.t1 + 2 * c.t2 + 2 * c.t3 + c.t4)
    assert c.s2 == pytest.approx(c.t3) and c.s3 == pytest.approx(c.t4)
    # s0 relation to phi2 = (5/3) alpha beta (3 - 4 gamma) lam
    phi2 = -240 * c.s0 - 20 * c.s2 - 10 * c.s3 + 1
    assert phi2 == pytest.approx(5 / 3 * p.alpha * p.beta * (3 - 4 * p.gamma), rel=1e-12)
    # the closed form gives 0.26680240 (quoted elsewhere as 0.2668028)
    assert phi2 == pytest.approx(0.266802395145423, rel=1e-12)
