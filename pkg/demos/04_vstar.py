"""Minimum V-angle threshold v* by bisection over angle grids.

A tetrahedron is fixed up to similarity by five plane angles. For a
candidate bound v, the reduced matrix N is evaluated on regular grids of
those angles (restricted to tetrahedra whose V-angle is at least v), and v
is accepted when every determinant is positive. Coarse grids are fast and
already land close to the fine-grid answer.

Run with ``python3 demos/04_vstar.py``; the full prime list takes minutes.
"""

import sys

from qfvm.scheme import preset
from qfvm.stability import DEFAULT_PRIMES, vstar_search

full = "--full" in sys.argv
primes = DEFAULT_PRIMES if full else (3, 5, 7)
for name in ("qfvs1", "qfvs2", "qfvs3", "qfvs4"):
    r = vstar_search(preset(name), primes=primes, precision=0.1)
    print(f"{name}: v* = {r.vstar:6.2f} deg  (primes {r.primes}, "
          f"{r.evaluations} grid points, {r.wall_time:.1f} s)")
