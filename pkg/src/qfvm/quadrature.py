"""Quadrature rules on triangles and tetrahedra in barycentric form.

Every rule is returned as ``(points, weights)`` where ``points`` holds
barycentric coordinates (rows sum to one) and ``weights`` sum to one, so
that the integral over a simplex of measure ``m`` is
``m * sum(w * f(points @ vertices))``.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

__all__ = ["triangle_rule", "tet_rule", "conical_rule", "simplex_monomial"]


def _orbit3(a, w):
    """Symmetric orbit ``(a, a, 1-2a)`` of a triangle rule."""
    b = 1.0 - 2.0 * a
    pts = [(a, a, b), (a, b, a), (b, a, a)]
    return pts, [w] * 3


def _orbit6(a, b, w):
    c = 1.0 - a - b
    pts = [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)]
    return pts, [w] * 6


def _assemble(*orbits):
    pts, wts = [], []
    for p, w in orbits:
        pts += p
        wts += w
    return np.array(pts), np.array(wts)


def _sym_triangle(degree):
    third = 1.0 / 3.0
    if degree <= 1:
        return np.array([[third] * 3]), np.array([1.0])
    if degree == 2:
        return _assemble(_orbit3(1.0 / 6.0, 1.0 / 3.0))
    if degree <= 4:
        return _assemble(
            _orbit3(0.445948490915965, 0.223381589678011),
            _orbit3(0.091576213509771, 0.109951743655322),
        )
    if degree == 5:
        s = np.sqrt(15.0)
        return _assemble(
            ([(third,) * 3], [9.0 / 40.0]),
            _orbit3((6.0 - s) / 21.0, (155.0 - s) / 1200.0),
            _orbit3((6.0 + s) / 21.0, (155.0 + s) / 1200.0),
        )
    if degree == 6:
        return _assemble(
            _orbit3(0.249286745170910, 0.116786275726379),
            _orbit3(0.063089014491502, 0.050844906370207),
            _orbit6(0.053145049844817, 0.310352451033784, 0.082851075618374),
        )
    return None


def _gauss01(n, a):
    """Gauss-Jacobi nodes on [0, 1] for the weight ``(1 - t)**a``."""
    x, w = roots_jacobi(n, a, 0.0)
    return 0.5 * (1.0 + x), w / w.sum()


@lru_cache(maxsize=None)
def conical_rule(dim, degree):
    """Collapsed Gauss-Jacobi (conical product) rule on a simplex.

    Exact for polynomials of total degree ``degree`` with positive weights.

    Parameters
    ----------
    dim : {2, 3}
    degree : int
    """
    n = max(1, (degree + 2) // 2)
    if dim == 2:
        u, wu = _gauss01(n, 1.0)
        v, wv = _gauss01(n, 0.0)
        U, V = np.meshgrid(u, v, indexing="ij")
        W = np.outer(wu, wv)
        L1 = U
        L2 = (1.0 - U) * V
        pts = np.stack([L1, L2, 1.0 - L1 - L2], axis=-1).reshape(-1, 3)
    elif dim == 3:
        u, wu = _gauss01(n, 2.0)
        v, wv = _gauss01(n, 1.0)
        s, ws = _gauss01(n, 0.0)
        U, V, Z = np.meshgrid(u, v, s, indexing="ij")
        W = wu[:, None, None] * wv[None, :, None] * ws[None, None, :]
        L1 = U
        L2 = (1.0 - U) * V
        L3 = (1.0 - U) * (1.0 - V) * Z
        pts = np.stack([L1, L2, L3, 1.0 - L1 - L2 - L3], axis=-1).reshape(-1, 4)
    else:
        raise ValueError("dim must be 2 or 3")
    w = W.ravel()
    return pts, w / w.sum()


@lru_cache(maxsize=None)
def triangle_rule(degree):
    """Triangle rule exact to total ``degree`` (1..7 supported).

    Symmetric Gauss rules are used up to degree 6; degree 7 falls back to
    the conical product.
    """
    if not 1 <= int(degree) <= 7:
        raise ValueError(f"unsupported triangle quadrature degree {degree}")
    rule = _sym_triangle(int(degree))
    if rule is None:
        rule = conical_rule(2, int(degree))
    pts, w = rule
    pts = np.array(pts, dtype=float)
    w = np.array(w, dtype=float)
    return pts, w / w.sum()


def _keast11():
    """Keast's 11-point rule, exact to degree 4 (one negative weight)."""
    pts = [(0.25,) * 4]
    wts = [-148.0 / 1875.0]
    a, b = 1.0 / 14.0, 11.0 / 14.0
    for k in range(4):
        p = [a] * 4
        p[k] = b
        pts.append(tuple(p))
        wts.append(343.0 / 7500.0)
    c = (1.0 + np.sqrt(5.0 / 14.0)) / 4.0
    d = (1.0 - np.sqrt(5.0 / 14.0)) / 4.0
    for i, j in ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)):
        p = [d] * 4
        p[i] = p[j] = c
        pts.append(tuple(p))
        wts.append(56.0 / 375.0)
    return np.array(pts), np.array(wts)


@lru_cache(maxsize=None)
def tet_rule(degree):
    """Tetrahedron rule exact to total ``degree`` (1..10 supported).

    Degrees 3 and 4 use Keast's 11-point rule; higher degrees use the
    conical product.
    """
    degree = int(degree)
    if not 1 <= degree <= 10:
        raise ValueError(f"unsupported tetrahedron quadrature degree {degree}")
    if degree == 1:
        return np.full((1, 4), 0.25), np.array([1.0])
    if degree in (3, 4):
        return _keast11()
    return conical_rule(3, degree)


def simplex_monomial(exponents):
    """Mean of ``prod L_i**a_i`` over a simplex (exact, for testing rules).

    ``d! prod(a_i!) / (d + sum a_i)!`` where ``d = len(exponents) - 1``.
    """
    from math import factorial

    d = len(exponents) - 1
    num = factorial(d)
    for a in exponents:
        num *= factorial(a)
    return num / factorial(d + sum(exponents))
