import numpy as np
import pytest
import scipy.sparse as sp

from qfvm.assembly import assemble
from qfvm.exceptions import SolverError
from qfvm.mesh import generate_structured
from qfvm.scheme import preset
from qfvm.solver import DENSE_LIMIT, as_csr, bicgstab, solve


def _nonsymmetric(n, rng):
    A = sp.random(n, n, density=0.05, random_state=np.random.RandomState(1))
    A = A + sp.diags(4.0 + rng.random(n))
    return sp.csr_matrix(A)


def test_bicgstab_random(rng):
    A = _nonsymmetric(300, rng)
    b = rng.standard_normal(300)
    x, its, restarts = bicgstab(A, b, rtol=1e-12)
    assert np.linalg.norm(A @ x - b) <= 1e-12 * np.linalg.norm(b)
    assert its > 0 and restarts == 0


def test_bicgstab_trivial_cases(rng):
    A = _nonsymmetric(20, rng)
    x, its, _ = bicgstab(A, np.zeros(20))
    assert its == 0 and not x.any()
    xs = np.linalg.solve(A.toarray(), np.ones(20))
    x, its, _ = bicgstab(A, np.ones(20), x0=xs)
    assert its == 0


def test_solve_matches_lu(rng):
    s = assemble(generate_structured(2), preset("qfvs1"), f=1.0)
    x1, r1 = solve(s)
    x2, r2 = solve(s, method="lu")
    assert x1 == pytest.approx(x2, rel=1e-9, abs=1e-13)
    assert r1.residual <= 1e-12 and r2.method == "lu"
    assert set(r1.as_dict()) == {"method", "iterations", "residual", "wall_time", "restarts"}


def test_solve_tuple_and_dense_limit(rng):
    A = sp.identity(DENSE_LIMIT + 1, format="csr")
    b = np.ones(DENSE_LIMIT + 1)
    x, rep = solve((A, b))
    assert x == pytest.approx(b) and rep.iterations <= 1
    with pytest.raises(SolverError, match="dense LU refused"):
        solve((A, b), method="lu")


def test_maxiter_error_carries_best(rng):
    A = _nonsymmetric(400, rng)
    b = rng.standard_normal(400)
    with pytest.raises(SolverError) as info:
        solve((A, b), rtol=1e-14, maxiter=2)
    assert info.value.best.shape == (400,)
    assert info.value.residual < 1.0


def test_zero_diagonal():
    A = sp.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
    with pytest.raises(SolverError, match="zero diagonal"):
        solve((A, np.ones(2)))
    x, _ = solve((A, np.ones(2)), method="lu")
    assert x == pytest.approx([1.0, 1.0])


def test_singular_lu():
    A = sp.csr_matrix(np.ones((3, 3)))
    with pytest.raises(SolverError, match="dense LU failed"):
        solve((A, np.array([1.0, 0.0, 0.0])), method="lu")


@pytest.mark.parametrize("kwargs,exc", [
    (dict(rtol=0.0), ValueError),
    (dict(rtol=1.0), ValueError),
    (dict(method="cg"), ValueError),
])
def test_bad_arguments(kwargs, exc):
    with pytest.raises(exc):
        solve((sp.identity(3, format="csr"), np.ones(3)), **kwargs)


def test_shape_checks():
    with pytest.raises(SolverError, match="rhs has shape"):
        solve((sp.identity(3, format="csr"), np.ones(4)))
    with pytest.raises(SolverError, match="square"):
        as_csr(np.ones((2, 3)))


def test_as_csr_canonical():
    A = sp.coo_matrix(([1.0, 2.0, 3.0], ([0, 0, 1], [1, 1, 0])), shape=(2, 2))
    C = as_csr(A)
    assert C.nnz == 2 and C[0, 1] == 3.0 and C.has_sorted_indices
