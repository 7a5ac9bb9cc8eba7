from itertools import product

import numpy as np
import pytest

from qfvm.quadrature import conical_rule, simplex_monomial, tet_rule, triangle_rule


def _monomials(nvars, degree):
    return [e for e in product(range(degree + 1), repeat=nvars) if sum(e) <= degree]


@pytest.mark.parametrize("degree", range(1, 8))
def test_triangle_exactness(degree):
    pts, w = triangle_rule(degree)
    assert w.sum() == pytest.approx(1.0)
    for e in _monomials(3, degree):
        val = w @ np.prod(pts ** np.array(e), axis=1)
        assert val == pytest.approx(simplex_monomial(e), abs=1e-14)


@pytest.mark.parametrize("degree", range(1, 11))
def test_tet_exactness(degree):
    pts, w = tet_rule(degree)
    assert w.sum() == pytest.approx(1.0)
    assert pts.sum(axis=1) == pytest.approx(np.ones(len(pts)))
    for e in _monomials(4, degree):
        val = w @ np.prod(pts ** np.array(e), axis=1)
        assert val == pytest.approx(simplex_monomial(e), abs=2e-15)


def test_keast_rule_used_for_degree_four():
    pts, w = tet_rule(4)
    assert len(w) == 11
    assert w[0] == pytest.approx(-148 / 1875)


def test_simplex_monomial_values():
    # mean of L1 L2 over a triangle is 2! 1! 1! / 4! = 1/12
    assert simplex_monomial((1, 1, 0)) == pytest.approx(1 / 12)
    # mean of L1^2 over a tetrahedron is 3! 2! / 5! = 1/10
    assert simplex_monomial((2, 0, 0, 0)) == pytest.approx(0.1)


@pytest.mark.parametrize("bad", [0, 8])
def test_triangle_bad_degree(bad):
    with pytest.raises(ValueError):
        triangle_rule(bad)


@pytest.mark.parametrize("bad", [0, 11])
def test_tet_bad_degree(bad):
    with pytest.raises(ValueError):
        tet_rule(bad)


def test_conical_positive_weights():
    for d in (2, 3):
        for k in range(1, 9):
            _, w = conical_rule(d, k)
            assert np.all(w > 0)
    with pytest.raises(ValueError):
        conical_rule(4, 2)
