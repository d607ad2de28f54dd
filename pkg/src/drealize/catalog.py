"""Worked examples used by the tests, the acceptance gate and ``drealize example``.

Names follow the example numbering used in the accompanying notes, so
``quadratic_colligation`` is the isometric, weakly coisometric realization of
``[lambda_1^2, sqrt(2) lambda_1 lambda_2, lambda_2^2]``.
"""
from __future__ import annotations

import math

import numpy as np

from . import mindex
from .colligation import Colligation, OutputPair

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)


def _E(i: int, j: int, n: int = 3) -> np.ndarray:
    M = np.zeros((n, n), dtype=complex)
    M[i, j] = 1.0
    return M


# -- a rational inner-like function with a non-invariant candidate space --------

def rational_S(lam) -> np.ndarray:
    """2 x 4 rational function whose kernel at the origin is ``0.75 I``."""
    l1, l2 = complex(lam[0]), complex(lam[1])
    den = 4.0 - l1 * l2
    M = np.array(
        [
            [2 * SQRT3 * l1, SQRT3 * l2**2, 2 - 2 * l1 * l2, -3 * l2],
            [SQRT3 * l1**2, 2 * SQRT3 * l2, -3 * l1, 2 - 2 * l1 * l2],
        ],
        dtype=complex,
    )
    return M / den


def rational_factored_kernel(lam, zeta) -> np.ndarray:
    l1, l2 = complex(lam[0]), complex(lam[1])
    z1, z2 = np.conj(complex(zeta[0])), np.conj(complex(zeta[1]))
    left = np.array([[2, l2], [l1, 2]], dtype=complex)
    right = np.array([[2, z1], [z2, 2]], dtype=complex)
    return 3.0 / ((4 - l1 * l2) * (4 - z1 * z2)) * (left @ right)


def rational_generators(cap: int) -> list[mindex.TruncatedSeries]:
    """Taylor polynomials of ``4/(4 - l1 l2) [2; l1]`` and ``4/(4 - l1 l2) [l2; 2]``."""
    f1: dict = {}
    f2: dict = {}
    for k in range(cap // 2 + 1):
        c = 0.25**k
        for n, v in (((k, k), [2 * c, 0]), ((k + 1, k), [0, c])):
            if sum(n) <= cap:
                f1[n] = np.array(v, dtype=complex).reshape(2, 1)
        for n, v in (((k, k + 1), [c, 0]), ((k, k), [0, 2 * c])):
            if sum(n) <= cap:
                f2[n] = np.array(v, dtype=complex).reshape(2, 1)
    return [
        mindex.TruncatedSeries.build(2, cap, (2, 1), f1),
        mindex.TruncatedSeries.build(2, cap, (2, 1), f2),
    ]


# -- a coisometric realization and a one-parameter family of twisted pairs -----

def twisted_colligation() -> Colligation:
    A = np.array([_E(0, 1), _E(0, 2)])
    B1 = np.zeros((3, 5), dtype=complex)
    B1[1, 0] = B1[2, 1] = 1.0
    B2 = np.zeros((3, 5), dtype=complex)
    B2[1, 2] = B2[2, 3] = 1.0
    C = np.array([[0.5, 0, 0]], dtype=complex)
    D = np.array([[0, 0, 0, 0, SQRT3 / 2]], dtype=complex)
    return Colligation(A, np.array([B1, B2]), C, D)


def twisted_S(lam) -> np.ndarray:
    l1, l2 = complex(lam[0]), complex(lam[1])
    return 0.5 * np.array([[l1**2, l1 * l2, l1 * l2, l2**2, SQRT3]], dtype=complex)


def twisted_pair(gamma: complex) -> OutputPair:
    """Non-commuting pairs sharing the observability kernel for every ``gamma``."""
    A1 = np.array([[0, 1, 0], [0, 0, 0], [gamma, 0, 0]], dtype=complex)
    A2 = np.array([[0, 0, 1], [-gamma, 0, 0], [0, 0, 0]], dtype=complex)
    return OutputPair(np.array([[0.5, 0, 0]], dtype=complex), np.array([A1, A2]))


# -- a homogeneous quadratic inner function ------------------------------------

def quadratic_colligation() -> Colligation:
    A = np.array([_E(0, 1), _E(0, 2)])
    r = 1 / SQRT2
    B1 = np.array([[0, 0, 0], [1, 0, 0], [0, r, 0]], dtype=complex)
    B2 = np.array([[0, 0, 0], [0, r, 0], [0, 0, 1]], dtype=complex)
    C = np.array([[1, 0, 0]], dtype=complex)
    D = np.zeros((1, 3), dtype=complex)
    return Colligation(A, np.array([B1, B2]), C, D)


def quadratic_multiplier() -> mindex.TruncatedSeries:
    row = lambda *v: np.array([v], dtype=complex)
    return mindex.TruncatedSeries.build(
        2, 2, (1, 3),
        {(2, 0): row(1, 0, 0), (1, 1): row(0, SQRT2, 0), (0, 2): row(0, 0, 1)},
    )


def quadratic_S(lam) -> np.ndarray:
    l1, l2 = complex(lam[0]), complex(lam[1])
    return np.array([[l1**2, SQRT2 * l1 * l2, l2**2]], dtype=complex)


def quadratic_kernel(lam, zeta) -> np.ndarray:
    return np.array([[1 + lam[0] * np.conj(zeta[0]) + lam[1] * np.conj(zeta[1])]])


# -- the same space, with a non-trivial free parameter -------------------------

def balanced_multiplier() -> mindex.TruncatedSeries:
    row = lambda *v: np.array([v], dtype=complex)
    return mindex.TruncatedSeries.build(
        2, 2, (1, 4),
        {(2, 0): row(1, 0, 0, 0), (1, 1): row(0, 1, 0, 1), (0, 2): row(0, 0, 1, 0)},
    )


def balanced_S(lam) -> np.ndarray:
    l1, l2 = complex(lam[0]), complex(lam[1])
    return np.array([[l1**2, l1 * l2, l2**2, l1 * l2]], dtype=complex)


def balanced_B(alpha: complex) -> np.ndarray:
    """The displayed input blocks ``(B_1, B_2)`` for parameter ``alpha``."""
    a, b = (1 + alpha) / 2, (1 - alpha) / 2
    B1 = np.array([[0, 0, 0, 0], [1, 0, 0, 0], [0, a, 0, b]], dtype=complex)
    B2 = np.array([[0, 0, 0, 0], [0, b, 0, a], [0, 0, 1, 0]], dtype=complex)
    return np.array([B1, B2])


def blaschke_S(a, lam) -> np.ndarray:
    """Closed-form ball automorphism ``phi_a`` written as a 1 x d row, for checks.

    ``phi_a(l) = (a - P_a l - s_a Q_a l) / (1 - <l, a>)`` with ``s_a = sqrt(1-|a|^2)``.
    Realizations of ``phi_a`` agree with it up to a unitary factor on the right, so
    tests compare ``1 - S(l) S(z)^*`` rather than values.
    """
    a = np.asarray(a, dtype=complex)
    lam = np.asarray(lam, dtype=complex)
    na2 = float(np.vdot(a, a).real)
    s = math.sqrt(1 - na2)
    inner = np.vdot(a, lam)  # <lam, a> = sum lam_j conj(a_j)
    if na2 == 0:
        P = np.zeros_like(lam)
    else:
        P = inner / na2 * a
    Qv = lam - P
    return ((a - P - s * Qv) / (1 - inner))[None, :]
