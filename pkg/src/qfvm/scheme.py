"""Parameter algebra of the quadratic FVM family.

A scheme is fixed by the dual-point locations ``(alpha, beta, gamma)`` and
the transfer parameter ``lam``. This module holds the admissible ranges,
the orthogonality equations with their closed-form solutions, the constants
``t1..t4`` and ``s0..s3, s*`` entering the element matrices, and the
10x10 mapping matrix ``S``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ParameterError

__all__ = [
    "ALPHA_MIN",
    "ALPHA_MAX",
    "SchemeParams",
    "SchemeConstants",
    "PRESETS",
    "preset",
    "t_integrals",
    "orthogonality_residuals",
    "solve_orthogonal",
    "lambda_range",
    "default_lambda",
    "mapping_matrix_S",
    "scheme_constants",
    "MIDPOINT_EDGES",
]

#: Open interval of alpha for which both orthogonality equations are solvable.
ALPHA_MIN = 0.5 - np.sqrt(6.0) / 6.0
ALPHA_MAX = 0.5

#: Local nodes 5..10 are the midpoints of these edges (0-based vertices):
#: M23, M13, M12, M14, M24, M34.
MIDPOINT_EDGES = ((1, 2), (0, 2), (0, 1), (0, 3), (1, 3), (2, 3))


@dataclass(frozen=True)
class SchemeParams:
    """Dual-point parameters and transfer parameter of a scheme.

    Parameters
    ----------
    alpha : float
        Edge points at fraction ``alpha`` from a vertex, in (0, 1/2).
    beta : float
        Face points at fraction ``beta`` from a vertex towards the opposite
        edge midpoint in that face, in (0, 2/3).
    gamma : float
        Interior points at fraction ``gamma`` from a vertex towards the
        opposite face barycenter, in (0, 3/4).
    lam : float, optional
        Transfer parameter, nonzero. Defaults to ``1 / (1 - 3 alpha beta)``.
    name : str, optional
        Label used in reports.
    """

    alpha: float
    beta: float
    gamma: float
    lam: float | None = None
    name: str = "custom"

    def __post_init__(self):
        a, b, g = float(self.alpha), float(self.beta), float(self.gamma)
        if not 0.0 < a < 0.5:
            raise ParameterError(f"alpha={a} outside (0, 1/2)")
        if not 0.0 < b < 2.0 / 3.0:
            raise ParameterError(f"beta={b} outside (0, 2/3)")
        if not 0.0 < g < 0.75:
            raise ParameterError(f"gamma={g} outside (0, 3/4)")
        lam = default_lambda(a, b) if self.lam is None else float(self.lam)
        if lam == 0.0 or not np.isfinite(lam):
            raise ParameterError("lambda must be finite and nonzero")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "lam", lam)

    def with_lambda(self, lam):
        return SchemeParams(self.alpha, self.beta, self.gamma, lam, self.name)

    @property
    def constants(self):
        return scheme_constants(self)

    def as_dict(self):
        return dict(name=self.name, alpha=self.alpha, beta=self.beta,
                    gamma=self.gamma, lam=self.lam)


@dataclass(frozen=True)
class SchemeConstants:
    """Constants entering the element matrices of a scheme."""

    t1: float
    t2: float
    t3: float
    t4: float
    s0: float
    s1: float
    s2: float
    s3: float
    s_star: float

    @property
    def t(self):
        return np.array([self.t1, self.t2, self.t3, self.t4])


def _check_ab(alpha, beta):
    if not 0.0 < alpha < 0.5:
        raise ParameterError(f"alpha={alpha} outside (0, 1/2)")
    if not 0.0 < beta < 2.0 / 3.0:
        raise ParameterError(f"beta={beta} outside (0, 2/3)")


def t_integrals(alpha, beta):
    """Face moments ``t1..t4`` of the first volume coordinate.

    On the reference face with vertices ``P1, P2, P3`` (in ``(L1, L2)``
    coordinates) these are the integrals of ``L1`` over the dual region of
    ``P1``, of ``P2``, of the midpoint ``M12`` and of ``M23`` respectively.

    Returns
    -------
    tuple of float
    """
    _check_ab(alpha, beta)
    ab = alpha * beta
    t1 = ab / 2.0 * (1.0 - (alpha + beta) / 3.0)
    t2 = ab * (alpha + beta) / 12.0
    t3 = 2.0 / 27.0 - ab / 4.0 * (1.0 - beta / 6.0)
    t4 = 1.0 / 54.0 - ab * beta / 12.0
    return t1, t2, t3, t4


def orthogonality_residuals(alpha, beta, gamma):
    """Residuals of the surface and volume orthogonality equations.

    Both vanish exactly when the piecewise-constant transfer of any linear
    function is orthogonal to linears on faces and on elements.
    """
    ab = alpha * beta
    surface = ab * (-0.5 + alpha / 3.0 + beta / 4.0) + 1.0 / 54.0
    volume = ab * gamma * (-1.0 + alpha / 2.0 + 3.0 * beta / 8.0 + gamma / 3.0) + 1.0 / 480.0
    return surface, volume


def solve_orthogonal(alpha):
    """Unique admissible ``(beta, gamma)`` satisfying both equations.

    Parameters
    ----------
    alpha : float
        Must lie in ``(1/2 - sqrt(6)/6, 1/2)``.

    Returns
    -------
    beta, gamma : float

    Raises
    ------
    ParameterError
        If ``alpha`` is outside the solvable interval.

    Examples
    --------
    >>> b, g = solve_orthogonal(0.1)
    >>> round(b, 7), round(g, 7)
    (0.572265, 0.0506673)
    """
    alpha = float(alpha)
    if not ALPHA_MIN < alpha < ALPHA_MAX:
        raise ParameterError(
            f"alpha={alpha} outside ({ALPHA_MIN:.6f}, {ALPHA_MAX}); "
            "the orthogonality equations have no admissible solution"
        )
    p = 1.0 - 2.0 * alpha / 3.0
    beta = p - np.sqrt(p * p - 2.0 / (27.0 * alpha))
    ab = alpha * beta
    q = 3.0 / 8.0 + 1.0 / (24.0 * ab)
    gamma = q - np.sqrt(q * q - 1.0 / (160.0 * ab))
    return float(beta), float(gamma)


def default_lambda(alpha, beta):
    """``1 / (1 - 3 alpha beta)``."""
    return 1.0 / (1.0 - 3.0 * alpha * beta)


def lambda_range(alpha, beta):
    """Open interval of ``lam`` for which the regular tetrahedron is stable.

    Returns
    -------
    lo, hi : float
        Roots of ``-3 (2t3+t4)^2 lam^2 + (2t3+5t4) lam - 1/12``.
    """
    _, _, t3, t4 = t_integrals(alpha, beta)
    a = 2.0 * t3 + 5.0 * t4
    d = 2.0 * np.sqrt(2.0 * t4 * (2.0 * t3 + 3.0 * t4))
    den = 6.0 * (2.0 * t3 + t4) ** 2
    return float((a - d) / den), float((a + d) / den)


def mapping_matrix_S(lam):
    """The 10x10 matrix ``S`` of the transfer map restricted to one element.

    Row ``m`` holds the coefficients of the test function of node ``m`` in
    terms of the characteristic functions of the ten dual cells.
    """
    lam = float(lam)
    if lam == 0.0:
        raise ParameterError("lambda must be nonzero")
    S = np.zeros((10, 10))
    S[:4, :4] = np.eye(4)
    for m, (j, k) in enumerate(MIDPOINT_EDGES):
        S[4 + m, 4 + m] = lam
        S[j, 4 + m] = S[k, 4 + m] = 0.5 * (1.0 - lam)
    return S


def scheme_constants(params):
    """:class:`SchemeConstants` of a :class:`SchemeParams`."""
    a, b, g, lam = params.alpha, params.beta, params.gamma, params.lam
    t1, t2, t3, t4 = t_integrals(a, b)
    return SchemeConstants(
        t1=t1, t2=t2, t3=t3, t4=t4,
        s0=1.0 / 240.0 + (4.0 * a * b * g - 1.0) * lam / 144.0,
        s1=t1 + 2.0 * t2 + 2.0 * t3 + t4,
        s2=t3 * lam,
        s3=t4 * lam,
        s_star=-t1 + 2.0 * t2 + t4,
    )


def _make_presets():
    a2 = 0.5 - np.sqrt(3.0) / 6.0
    b2 = 2.0 / 3.0 + np.sqrt(3.0) / 9.0 - np.sqrt(21.0 + 6.0 * np.sqrt(3.0)) / 9.0
    table = {
        "qfvs1": (0.1, 14.0 / 15.0 - 2.0 * np.sqrt(66.0) / 45.0, 0.050667311760225),
        "qfvs2": (a2, b2, 0.052883196779577),
        "qfvs3": (0.4, 11.0 / 15.0 - np.sqrt(714.0) / 45.0, solve_orthogonal(0.4)[1]),
        "qfvs4": (a2, b2, 0.25),
    }
    return {k: (a, b, g) for k, (a, b, g) in table.items()}


#: ``(alpha, beta, gamma)`` of the four named schemes.
PRESETS = _make_presets()

#: Minimum V-angle thresholds (degrees) reported for the presets at the
#: default lambda; used only for labelling.
PRESET_VSTAR = {"qfvs1": 20.5, "qfvs2": 17.0, "qfvs3": 16.7, "qfvs4": 18.2}


def preset(name, lam=None):
    """:class:`SchemeParams` of a named scheme (``qfvs1`` .. ``qfvs4``)."""
    key = name.lower().replace("-", "").replace("_", "")
    if key not in PRESETS:
        raise ParameterError(f"unknown scheme {name!r}; choose from {sorted(PRESETS)}")
    a, b, g = PRESETS[key]
    return SchemeParams(a, b, g, lam, name=key)
