"""Convergence on structured cube meshes.

Solves -div(kappa grad u) = f with u = sin(pi x) sin(pi y) sin(pi z) and
kappa = exp(x + 2y + 3z) on N^3 cubes split into six tetrahedra each. The
orthogonal scheme QFVS-1 shows second order in H1 and third order in L2;
QFVS-4, which only satisfies the surface condition, drops to second order
in L2 as the mesh is refined.

Small meshes keep this under a minute; the acceptance suite runs N up to 25.

Run with ``python3 demos/03_convergence.py``.
"""

from qfvm.convergence import run_convergence
from qfvm.scheme import preset

for name in ("qfvs1", "qfvs4"):
    rep = run_convergence(preset(name), [2, 4, 8], case="exp-kappa-sine")
    print(f"# {name}")
    print(rep.to_csv())
