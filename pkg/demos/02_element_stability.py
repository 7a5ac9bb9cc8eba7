"""Element stability: from the flux matrix to the reduced 6x6 test.

The element matrix is mapped to the test side with S(lambda), reduced to
the nine-dimensional gradient space and symmetrised. For surface-orthogonal
schemes a congruence splits the result into a 3x3 block (always positive
definite) and a 6x6 block N that decides stability.

Run with ``python3 demos/02_element_stability.py``.
"""

import numpy as np

from qfvm.geometry import REGULAR_TET, min_v_angle, tet_geometry
from qfvm.scheme import lambda_range, preset
from qfvm.stability import element_stability, regular_tet_minors

p = preset("qfvs1")
lo, hi = lambda_range(p.alpha, p.beta)
print(f"QFVS-1, regular tetrahedron, admissible lambda ({lo:.6f}, {hi:.6f})")
for lam in (lo - 0.01, lo + 0.01, 1.0, p.lam, hi - 0.01, hi + 0.01):
    st = element_stability(REGULAR_TET, p.with_lambda(lam))
    print(f"  lambda={lam:8.5f}  min eig(B_bar/h)={st.lambda_min:+.3e}  "
          f"{'stable' if st.stable else 'not stable'}")

numeric, closed = regular_tet_minors(p.with_lambda(1.0))
print("\nleading minors of order 3..9 (matrix vs closed form):")
for k, (a, b) in enumerate(zip(numeric, closed), start=3):
    print(f"  {k}: {a:+.10e}  {b:+.10e}")

# flatten a tetrahedron step by step until it loses stability; v* is a
# worst case over all shapes, so a given element may survive below it
print("\nflattening the apex towards the base plane:")
for z in (0.8, 0.4, 0.2, 0.1, 0.05, 0.02):
    X = np.array([[0, 0, 0], [1, 0, 0], [0.5, np.sqrt(3) / 2, 0], [0.5, 0.3, z]])
    g = tet_geometry(X)
    st = element_stability(g, p)
    print(f"  z={z:5.2f}  V-angle={np.degrees(min_v_angle(g)):6.2f} deg  "
          f"{'stable' if st.stable else 'not stable'}")
