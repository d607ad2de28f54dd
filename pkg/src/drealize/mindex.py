"""Multi-indices and truncated matrix-valued power series.

A power series in ``d`` commuting variables is stored sparsely as a mapping
from multi-indices (tuples of non-negative ints) to coefficient matrices.  The
Drury-Arveson inner product weights the coefficient at ``n`` by
``n! / |n|!``, the reciprocal of the multinomial :func:`weight`.

Ordering is graded-lexicographic: first by total degree, then descending in
the exponent tuple, so in two variables the degree-two block is
``(2, 0), (1, 1), (0, 2)``.
"""
from __future__ import annotations

import math
import operator
import sys
from dataclasses import dataclass
from functools import lru_cache
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from .errors import DegreeTooLargeError, InputError

MultiIndex = tuple[int, ...]

_FLOAT_LIMIT = int(sys.float_info.max)


def check_index(n: Iterable[int], d: int | None = None) -> MultiIndex:
    try:
        n = tuple(operator.index(k) for k in n)
    except TypeError:
        raise InputError(f"multi-index {n!r} must be a sequence of integers") from None
    if any(k < 0 for k in n):
        raise InputError(f"multi-index {n} has a negative entry")
    if d is not None and len(n) != d:
        raise InputError(f"multi-index {n} has length {len(n)}, expected {d}")
    return n


def weight(n: MultiIndex) -> int:
    """Multinomial coefficient ``|n|! / n!`` as an exact integer.

    Raises
    ------
    DegreeTooLargeError
        If the value exceeds the largest finite double, since every consumer
        of the weight works in floating point.
    """
    n = check_index(n)
    w = 1
    total = 0
    for k in n:
        total += k
        w *= math.comb(total, k)
    if w > _FLOAT_LIMIT:
        raise DegreeTooLargeError(f"weight of {n} overflows double precision")
    return w


def grlex_key(n: MultiIndex) -> tuple:
    return (sum(n), tuple(-k for k in n))


@lru_cache(maxsize=None)
def indices_of_degree(d: int, k: int) -> tuple[MultiIndex, ...]:
    """All multi-indices of length ``d`` and total degree ``k`` in grlex order."""
    if d < 1:
        raise InputError("number of variables must be at least 1")
    if d == 1:
        return ((k,),)
    out = []
    for first in range(k, -1, -1):
        for rest in indices_of_degree(d - 1, k - first):
            out.append((first,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def indices_up_to(d: int, cap: int) -> tuple[MultiIndex, ...]:
    out: list[MultiIndex] = []
    for k in range(cap + 1):
        out.extend(indices_of_degree(d, k))
    return tuple(out)


def unit(d: int, j: int) -> MultiIndex:
    return tuple(1 if i == j else 0 for i in range(d))


def monomial_value(n: MultiIndex, lam: np.ndarray) -> complex:
    v = 1.0 + 0.0j
    for z, k in zip(lam, n):
        if k:
            v *= z**k
    return v


@dataclass(frozen=True, eq=False)
class TruncatedSeries:
    """Sparse power series known exactly through total degree ``cap``.

    Coefficients are complex ``shape[0] x shape[1]`` matrices.  Indices absent
    from ``coeffs`` have zero coefficient.  Column vectors (``shape[1] == 1``)
    play the role of elements of the vector-valued Drury-Arveson space.
    """

    d: int
    cap: int
    shape: tuple[int, int]
    coeffs: Mapping[MultiIndex, np.ndarray]

    @classmethod
    def build(cls, d: int, cap: int, shape, coeffs: Mapping) -> "TruncatedSeries":
        shape = (int(shape[0]), int(shape[1]))
        if d < 1 or cap < 0:
            raise InputError("need d >= 1 and cap >= 0")
        clean: dict[MultiIndex, np.ndarray] = {}
        for n, c in coeffs.items():
            n = check_index(n, d)
            if sum(n) > cap:
                raise InputError(f"index {n} exceeds the degree cap {cap}")
            c = np.array(c, dtype=complex).reshape(shape)
            c.setflags(write=False)
            clean[n] = c
        ordered = {n: clean[n] for n in sorted(clean, key=grlex_key)}
        return cls(d, cap, shape, MappingProxyType(ordered))

    def __getitem__(self, n) -> np.ndarray:
        c = self.coeffs.get(tuple(n))
        if c is None:
            return np.zeros(self.shape, dtype=complex)
        return c

    def items(self):
        return self.coeffs.items()

    @property
    def degree(self) -> int:
        """Largest degree carrying a nonzero coefficient (``-1`` for zero)."""
        degs = [sum(n) for n, c in self.coeffs.items() if np.any(c != 0)]
        return max(degs) if degs else -1

    def evaluate(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=complex)
        out = np.zeros(self.shape, dtype=complex)
        for n, c in self.coeffs.items():
            out += monomial_value(n, lam) * c
        return out

    def _combine(self, other: "TruncatedSeries", sign: float) -> "TruncatedSeries":
        _check_compatible(self, other)
        out = {n: c.copy() for n, c in self.coeffs.items()}
        for n, c in other.coeffs.items():
            out[n] = out[n] + sign * c if n in out else sign * c
        return TruncatedSeries.build(self.d, min(self.cap, other.cap), self.shape, out)

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def scale(self, s: complex) -> "TruncatedSeries":
        return self.map(lambda c: s * c, self.shape)

    def left(self, M: np.ndarray) -> "TruncatedSeries":
        """Coefficientwise ``M @ f_n``."""
        M = np.asarray(M, dtype=complex)
        return self.map(lambda c: M @ c, (M.shape[0], self.shape[1]))

    def right(self, M: np.ndarray) -> "TruncatedSeries":
        """Coefficientwise ``f_n @ M``."""
        M = np.asarray(M, dtype=complex)
        return self.map(lambda c: c @ M, (self.shape[0], M.shape[1]))

    def map(self, fn, shape) -> "TruncatedSeries":
        return TruncatedSeries.build(
            self.d, self.cap, shape, {n: fn(c) for n, c in self.coeffs.items()}
        )

    def truncate(self, cap: int) -> "TruncatedSeries":
        cap = min(cap, self.cap)
        kept = {n: c for n, c in self.coeffs.items() if sum(n) <= cap}
        return TruncatedSeries.build(self.d, cap, self.shape, kept)

    def degree_norm(self, k: int) -> float:
        """Max spectral norm of the coefficients of total degree ``k``."""
        vals = [np.linalg.norm(c, 2) for n, c in self.coeffs.items() if sum(n) == k and c.size]
        return float(max(vals)) if vals else 0.0


# An ArvesonElement is a TruncatedSeries with a single column.
ArvesonElement = TruncatedSeries


def _check_compatible(a: TruncatedSeries, b: TruncatedSeries) -> None:
    if a.d != b.d:
        raise InputError(f"series in {a.d} and {b.d} variables cannot be combined")
    if a.shape != b.shape:
        raise InputError(f"coefficient shapes {a.shape} and {b.shape} differ")


def constant(d: int, cap: int, M) -> TruncatedSeries:
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    return TruncatedSeries.build(d, cap, M.shape, {(0,) * d: M})


def identity(d: int, cap: int, size: int) -> TruncatedSeries:
    return constant(d, cap, np.eye(size, dtype=complex))


def monomial(d: int, cap: int, n: MultiIndex, M) -> TruncatedSeries:
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    return TruncatedSeries.build(d, cap, M.shape, {check_index(n, d): M})


def linear_pencil(mats, cap: int) -> TruncatedSeries:
    """The series ``sum_j lambda_j M_j`` for a stack ``mats`` of shape ``(d, m, n)``."""
    mats = np.asarray(mats, dtype=complex)
    d = mats.shape[0]
    return TruncatedSeries.build(
        d, cap, mats.shape[1:], {unit(d, j): mats[j] for j in range(d)} if cap >= 1 else {}
    )


def series_mul(a: TruncatedSeries, b: TruncatedSeries, cap: int) -> TruncatedSeries:
    """Cauchy product ``a * b`` truncated at ``min(cap, a.cap, b.cap)``."""
    if a.d != b.d:
        raise InputError(f"series in {a.d} and {b.d} variables cannot be multiplied")
    if a.shape[1] != b.shape[0]:
        raise InputError(f"inner dimensions {a.shape} x {b.shape} do not match")
    cap = min(cap, a.cap, b.cap)
    out: dict[MultiIndex, np.ndarray] = {}
    for m, am in a.items():
        dm = sum(m)
        if dm > cap:
            continue
        for k, bk in b.items():
            if dm + sum(k) > cap:
                continue
            n = tuple(x + y for x, y in zip(m, k))
            prod = am @ bk
            if n in out:
                out[n] += prod
            else:
                out[n] = prod
    return TruncatedSeries.build(a.d, cap, (a.shape[0], b.shape[1]), out)


def neumann_inverse(a: TruncatedSeries, cap: int, tol: float = 1e-12) -> TruncatedSeries:
    """Inverse of a series whose constant term is the identity.

    Writing ``a = I - L`` the inverse is ``sum_k L^k``; it is computed degree by
    degree from ``R_n = sum_m L_m R_{n-m}`` so each coefficient costs one pass
    over the support of ``L``.
    """
    if a.shape[0] != a.shape[1]:
        raise InputError("neumann_inverse needs square coefficients")
    size = a.shape[0]
    I = np.eye(size, dtype=complex)
    zero = (0,) * a.d
    if np.max(np.abs(a[zero] - I), initial=0.0) > tol:
        raise InputError("constant term of the series is not the identity")
    cap = min(cap, a.cap)
    L = [(m, -c) for m, c in a.items() if m != zero]
    R: dict[MultiIndex, np.ndarray] = {zero: I}
    for k in range(1, cap + 1):
        for n in indices_of_degree(a.d, k):
            acc = None
            for m, Lm in L:
                rest = tuple(x - y for x, y in zip(n, m))
                if min(rest) < 0:
                    continue
                Rr = R.get(rest)
                if Rr is None:
                    continue
                term = Lm @ Rr
                acc = term if acc is None else acc + term
            if acc is not None:
                R[n] = acc
    return TruncatedSeries.build(a.d, cap, a.shape, R)


def backward_shift(f: TruncatedSeries, axis: int) -> TruncatedSeries:
    """Adjoint of multiplication by ``lambda_axis`` (``axis`` is 0-based).

    ``lambda^m`` maps to ``(m_axis / |m|) lambda^(m - e_axis)`` and monomials
    with ``m_axis = 0`` are annihilated.  The result is exact through degree
    ``f.cap - 1``.
    """
    if not 0 <= axis < f.d:
        raise InputError(f"shift axis {axis} outside 0..{f.d - 1}")
    out: dict[MultiIndex, np.ndarray] = {}
    for m, c in f.items():
        if m[axis] == 0:
            continue
        n = tuple(k - 1 if i == axis else k for i, k in enumerate(m))
        out[n] = (m[axis] / sum(m)) * c
    return TruncatedSeries.build(f.d, max(f.cap - 1, 0), f.shape, out)


def arveson_inner(f: TruncatedSeries, g: TruncatedSeries) -> complex:
    """``<f, g>`` in the Drury-Arveson space, linear in ``f``.

    Only degrees through ``min(f.cap, g.cap)`` contribute.
    """
    _check_compatible(f, g)
    cap = min(f.cap, g.cap)
    total = 0.0 + 0.0j
    for n, fn in f.items():
        if sum(n) > cap:
            continue
        gn = g.coeffs.get(n)
        if gn is not None:
            total += np.vdot(gn, fn) / weight(n)
    return complex(total)


def arveson_norm(f: TruncatedSeries) -> float:
    return float(np.sqrt(max(arveson_inner(f, f).real, 0.0)))


class MonomialBasis:
    """Coordinates of ``C^dim``-valued polynomials of degree ``<= cap``.

    The coordinate of ``f`` at ``(n, i)`` is ``f_n[i] / sqrt(weight(n))``, the
    expansion in the orthonormal basis ``sqrt(weight(n)) lambda^n e_i``.
    Euclidean inner products of coordinate vectors therefore equal
    Drury-Arveson inner products.
    """

    def __init__(self, d: int, cap: int, dim: int):
        self.d, self.cap, self.dim = d, cap, dim
        self.indices = indices_up_to(d, cap)
        self.position = {n: k for k, n in enumerate(self.indices)}
        self.root_weight = np.array([math.sqrt(weight(n)) for n in self.indices])
        self.degrees = np.array([sum(n) for n in self.indices])

    @property
    def size(self) -> int:
        return len(self.indices) * self.dim

    def slot(self, n: MultiIndex) -> slice:
        k = self.position[n]
        return slice(k * self.dim, (k + 1) * self.dim)

    def coordinate_degrees(self) -> np.ndarray:
        return np.repeat(self.degrees, self.dim)

    def coords(self, f: TruncatedSeries) -> np.ndarray:
        """Coordinate matrix (``size x f.shape[1]``) of a series of degree <= cap."""
        if f.d != self.d or f.shape[0] != self.dim:
            raise InputError("series does not live in this polynomial space")
        out = np.zeros((self.size, f.shape[1]), dtype=complex)
        for n, c in f.items():
            if not np.any(c):
                continue
            if sum(n) > self.cap:
                raise InputError(f"series has a nonzero coefficient at {n} beyond cap {self.cap}")
            out[self.slot(n)] = c / self.root_weight[self.position[n]]
        return out

    def series(self, v: np.ndarray) -> TruncatedSeries:
        v = np.asarray(v, dtype=complex)
        if v.ndim == 1:
            v = v[:, None]
        coeffs = {}
        for k, n in enumerate(self.indices):
            block = v[k * self.dim:(k + 1) * self.dim]
            if np.any(block):
                coeffs[n] = block * self.root_weight[k]
        return TruncatedSeries.build(self.d, self.cap, (self.dim, v.shape[1]), coeffs)

    def evaluation_matrix(self, lam) -> np.ndarray:
        """``dim x size`` matrix sending coordinates to the value at ``lam``."""
        lam = np.asarray(lam, dtype=complex)
        row = np.array([monomial_value(n, lam) for n in self.indices]) * self.root_weight
        return np.kron(row[None, :], np.eye(self.dim))

    def shift_adjoint_matrix(self, axis: int) -> np.ndarray:
        """Backward shift along ``axis`` in coordinates.

        In the orthonormal basis it sends ``e_m`` to
        ``sqrt(m_axis / |m|) e_(m - e_axis)``.
        """
        S = np.zeros((len(self.indices), len(self.indices)))
        for k, m in enumerate(self.indices):
            if m[axis] == 0:
                continue
            n = tuple(x - 1 if i == axis else x for i, x in enumerate(m))
            S[self.position[n], k] = math.sqrt(m[axis] / sum(m))
        return np.kron(S, np.eye(self.dim))
