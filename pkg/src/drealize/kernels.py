"""Reproducing kernels attached to a colligation and the weak coisometry test.

Two kernels are compared throughout: the de Branges-Rovnyak kernel
``K_S(lambda, zeta) = (I - S(lambda) S(zeta)^*) / (1 - <lambda, zeta>)`` of a
transfer function, and the observability kernel
``K_{C,A}(lambda, zeta) = C (I - Z(lambda)A)^{-1} (I - A^* Z(zeta)^*)^{-1} C^*``.
Their difference is governed by the defect ``I - U U^*``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import mindex
from ._linalg import (
    canonical_basis,
    hermitian_part,
    max_principal_angle,
    null_space,
    random_ball_points,
    range_basis,
    spectral_norm,
)
from .colligation import Colligation, OutputPair, transfer_eval
from .errors import InputError

DEFAULT_RADIUS = 0.7


def ball_inner(lam, zeta) -> complex:
    return complex(np.sum(np.asarray(lam, dtype=complex) * np.conj(zeta)))


def _check_ball(*points) -> None:
    for z in points:
        if np.linalg.norm(z) >= 1.0:
            raise InputError(f"point {tuple(np.asarray(z))} lies outside the open unit ball")


def kernel_KS(S: Callable, lam, zeta) -> np.ndarray:
    """``(I - S(lambda) S(zeta)^*) / (1 - <lambda, zeta>)`` for an evaluator ``S``."""
    _check_ball(lam, zeta)
    Sl = np.atleast_2d(S(lam))
    Sz = np.atleast_2d(S(zeta))
    num = np.eye(Sl.shape[0]) - Sl @ Sz.conj().T
    return num / (1.0 - ball_inner(lam, zeta))


def kernel_KCA(pair: OutputPair, lam, zeta) -> np.ndarray:
    """``C (I - Z(lambda)A)^{-1} (I - A^* Z(zeta)^*)^{-1} C^*``."""
    _check_ball(lam, zeta)
    return pair.output_row(lam) @ pair.output_row(zeta).conj().T


def _defect_row(col: Colligation, lam) -> np.ndarray:
    # [C (I - Z(lambda)A)^{-1} Z(lambda), I_r] acting on (C^p)^d + C^r
    lam = np.asarray(lam, dtype=complex)
    row = col.pair.output_row(lam)
    return np.hstack([np.kron(lam[None, :], row), np.eye(col.dim_output)])


@dataclass(frozen=True, eq=False)
class DefectDecomposition:
    """``K_S = K_{C,A} + residual`` at one pair of points.

    ``identity_error`` is ``||K_S - K_{C,A} - residual||``; it should be at the
    level of round-off for any colligation.  ``residual`` is a positive
    kernel when ``U`` is contractive.
    """

    KS: np.ndarray
    KCA: np.ndarray
    residual: np.ndarray
    identity_error: float


def defect_decomposition(col: Colligation, lam, zeta) -> DefectDecomposition:
    """Split ``K_S`` into ``K_{C,A}`` plus the ``(I - UU^*)`` term."""
    _check_ball(lam, zeta)
    KS = kernel_KS(lambda z: transfer_eval(col, z), lam, zeta)
    KCA = kernel_KCA(col.pair, lam, zeta)
    U = col.U
    defect = np.eye(U.shape[0]) - U @ U.conj().T
    rl = _defect_row(col, lam)
    rz = _defect_row(col, zeta)
    residual = rl @ defect @ rz.conj().T / (1.0 - ball_inner(lam, zeta))
    err = spectral_norm(KS - KCA - residual)
    return DefectDecomposition(KS, KCA, residual, err)


@dataclass(frozen=True, eq=False)
class KernelGrid:
    """Values of one kernel on all pairs of a set of base points.

    ``values[i, k]`` is ``K(points[i], points[k])``.  ``which`` names the
    kernel (``"KS"``, ``"KCA"`` or ``"residual"``).
    """

    which: str
    points: np.ndarray
    values: np.ndarray

    @property
    def pairs(self):
        n = self.points.shape[0]
        return [(self.points[i], self.points[k]) for i in range(n) for k in range(n)]

    def gram(self) -> np.ndarray:
        n, _, r, _ = self.values.shape
        return self.values.transpose(0, 2, 1, 3).reshape(n * r, n * r)


def sample_kernel_grid(kernel: Callable, points, which: str) -> KernelGrid:
    points = np.asarray(points, dtype=complex)
    _check_ball(*points)
    n = points.shape[0]
    first = np.atleast_2d(kernel(points[0], points[0]))
    r = first.shape[0]
    values = np.zeros((n, n, r, r), dtype=complex)
    for i in range(n):
        for k in range(n):
            values[i, k] = kernel(points[i], points[k])
    return KernelGrid(which, points, values)


def colligation_grid(col: Colligation, which: str, n: int = 20,
                     radius: float = DEFAULT_RADIUS, seed: int = 0) -> KernelGrid:
    """Sample ``K_S``, ``K_{C,A}`` or the defect residual on random ball points."""
    rng = np.random.default_rng(seed)
    pts = random_ball_points(n, col.d, radius, rng)
    if which == "KS":
        kern = lambda l, z: kernel_KS(lambda x: transfer_eval(col, x), l, z)
    elif which == "KCA":
        kern = lambda l, z: kernel_KCA(col.pair, l, z)
    elif which == "residual":
        kern = lambda l, z: defect_decomposition(col, l, z).residual
    else:
        raise InputError(f"unknown kernel {which!r}; expected KS, KCA or residual")
    return sample_kernel_grid(kern, pts, which)


@dataclass(frozen=True)
class PSDReport:
    psd: bool
    min_eigenvalue: float
    asymmetry: float
    tol: float


def kernel_psd_check(grid: KernelGrid, tol: float = 1e-10) -> PSDReport:
    """Positivity of the block Gram matrix ``[K(lambda_i, lambda_k)]``."""
    G = grid.gram()
    asym = spectral_norm(G - G.conj().T)
    w = np.linalg.eigvalsh(hermitian_part(G))
    lo = float(w[0]) if w.size else 0.0
    return PSDReport(lo >= -tol and asym <= tol, lo, asym, tol)


@dataclass(frozen=True, eq=False)
class DSubspace:
    """The closed span of ``Z(zeta)^* (I - A^* Z(zeta)^*)^{-1} C^* y`` in ``(C^p)^d``.

    ``basis`` has orthonormal columns.  ``inconclusive`` is set when the
    series was cut at ``cap`` before its terms had decayed.  The sampled
    cross-check records its own rank and the largest principal angle to the
    series span.
    """

    basis: np.ndarray
    ambient_dim: int
    method: str
    degree_reached: int
    inconclusive: bool
    sampled_rank: int = -1
    sampled_angle: float = float("nan")
    notes: tuple[str, ...] = field(default_factory=tuple)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def sampled_agrees(self) -> bool:
        return self.sampled_rank == self.dim and self.sampled_angle <= 1e-6

    def complement(self) -> np.ndarray:
        """Canonical orthonormal basis of the orthogonal complement."""
        if self.dim == 0:
            return np.eye(self.ambient_dim, dtype=complex)
        return canonical_basis(null_space(self.basis.conj().T))


def _extend_basis(Q: np.ndarray, block: np.ndarray, scale: float, rel_tol: float) -> np.ndarray:
    if block.size == 0:
        return Q
    resid = block - Q @ (Q.conj().T @ block)
    resid = resid - Q @ (Q.conj().T @ resid)
    U, s, _ = np.linalg.svd(resid, full_matrices=False)
    keep = s > rel_tol * scale
    if not np.any(keep):
        return Q
    new = U[:, keep]
    new = new - Q @ (Q.conj().T @ new)
    new, _ = np.linalg.qr(new)
    return np.hstack([Q, new])


def sampled_generators(pair: OutputPair, points) -> np.ndarray:
    """Columns ``Z(zeta)^*(I - A^*Z(zeta)^*)^{-1} C^* e_k`` at each sample point."""
    cols = []
    for z in points:
        Fs = pair.output_row(z).conj().T  # (I - A^* Z(z)^*)^{-1} C^*, p x r
        cols.append(np.vstack([np.conj(zj) * Fs for zj in z]))
    return np.hstack(cols)


def d_subspace(pair: OutputPair, cap: int = 120, rel_tol: float = 1e-10,
               decay_tol: float = 1e-12, seed: int = 0) -> DSubspace:
    """Compute the subspace ``D`` from the Taylor coefficients of its generators.

    In ``conj(zeta)`` the generator expands with coefficient
    ``h_m = sum_j e_j (x) f_(m - e_j)`` where ``f_n = R_n^* C^*`` and ``R_n`` are
    the coefficients of ``(I - Z A)^{-1}``, obeying ``f_n = sum_j A_j^* f_(n-e_j)``.
    Degrees are added until the span fills ``(C^p)^d`` or the weighted
    degree mass ``sum_{|n|=k} ||f_n||^2 / weight(n)`` drops below
    ``decay_tol^2`` times its initial value.  Reaching ``cap`` first marks the
    result inconclusive.

    A sampled span at ``2 dim D`` random points of radius 0.7 is always
    computed as a cross-check.
    """
    d, p, r = pair.d, pair.dim_state, pair.dim_output
    ambient = d * p
    Astar = np.array([Aj.conj().T for Aj in pair.A])
    f_prev: dict[tuple, np.ndarray] = {(0,) * d: pair.C.conj().T.copy()}
    mass0 = float(np.sum(np.abs(pair.C) ** 2))
    Q = np.zeros((ambient, 0), dtype=complex)
    scale = 0.0
    inconclusive = True
    degree = 0
    if mass0 == 0.0 or ambient == 0:
        inconclusive = False
    else:
        for k in range(1, cap + 1):
            degree = k
            # generators of degree k use f at degree k-1
            cols = []
            for m in mindex.indices_of_degree(d, k):
                h = np.zeros((ambient, r), dtype=complex)
                for j in range(d):
                    if m[j] == 0:
                        continue
                    n = tuple(x - 1 if i == j else x for i, x in enumerate(m))
                    fn = f_prev.get(n)
                    if fn is not None:
                        h[j * p:(j + 1) * p] = fn
                cols.append(h * np.sqrt(1.0 / mindex.weight(m)))
            block = np.hstack(cols)
            scale = max(scale, float(np.max(np.linalg.norm(block, axis=0), initial=0.0)))
            Q = _extend_basis(Q, block, scale, rel_tol)
            if Q.shape[1] == ambient:
                inconclusive = False
                break
            # advance f to degree k
            f_next: dict[tuple, np.ndarray] = {}
            mass = 0.0
            for n in mindex.indices_of_degree(d, k):
                acc = np.zeros((p, r), dtype=complex)
                for j in range(d):
                    if n[j] == 0:
                        continue
                    prev = tuple(x - 1 if i == j else x for i, x in enumerate(n))
                    fp = f_prev.get(prev)
                    if fp is not None:
                        acc += Astar[j] @ fp
                f_next[n] = acc
                mass += float(np.sum(np.abs(acc) ** 2)) / mindex.weight(n)
            f_prev = f_next
            if mass <= (decay_tol**2) * mass0:
                # the next degree is negligible; it would add nothing above rel_tol
                degree = k + 1
                inconclusive = False
                break
    basis = canonical_basis(Q)
    rng = np.random.default_rng(seed)
    npts = max(2 * basis.shape[1], 2)
    pts = random_ball_points(npts, d, DEFAULT_RADIUS, rng)
    G = sampled_generators(pair, pts)
    Qs = range_basis(G, rel_tol)
    angle = max_principal_angle(basis, Qs)
    notes = () if Qs.shape[1] == basis.shape[1] else (
        f"sampled span has dimension {Qs.shape[1]}, series span {basis.shape[1]}",
    )
    return DSubspace(basis, ambient, "series", degree, inconclusive, Qs.shape[1], angle, notes)


@dataclass(frozen=True)
class WeakCoisometryReport:
    passed: bool
    defect: float
    contractive: bool
    dim_d: int
    tol: float


def weakly_coisometric_check(col: Colligation, dsub: DSubspace, tol: float = 1e-10) -> WeakCoisometryReport:
    """``U^*`` contractive and isometric on ``D + Y``.

    The defect is ``||P^* (I - UU^*) P||`` with ``P`` the isometric embedding of
    ``D + Y`` into ``(C^p)^d + C^r``.
    """
    if dsub.ambient_dim != col.d * col.dim_state:
        raise InputError(
            f"D lives in dimension {dsub.ambient_dim}, colligation needs {col.d * col.dim_state}"
        )
    U = col.U
    defect_op = np.eye(U.shape[0]) - U @ U.conj().T
    contractive = float(np.min(np.linalg.eigvalsh(hermitian_part(defect_op)), initial=0.0)) >= -tol
    r = col.dim_output
    P = np.zeros((U.shape[0], dsub.dim + r), dtype=complex)
    P[: dsub.ambient_dim, : dsub.dim] = dsub.basis
    P[dsub.ambient_dim:, dsub.dim:] = np.eye(r)
    defect = spectral_norm(P.conj().T @ defect_op @ P)
    return WeakCoisometryReport(contractive and defect <= tol, defect, contractive, dsub.dim, tol)
