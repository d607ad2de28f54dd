"""Small dense linear-algebra helpers built on numpy/scipy."""
from __future__ import annotations

import numpy as np
import scipy.linalg as sla


def as_complex(a, ndim=None) -> np.ndarray:
    out = np.array(a, dtype=complex)
    if ndim is not None and out.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {out.shape}")
    return out


def frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


def spectral_norm(M: np.ndarray) -> float:
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def hermitian_part(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.conj().T)


def psd_sqrt(M: np.ndarray) -> np.ndarray:
    """Principal square root of a Hermitian PSD matrix (negative round-off clipped)."""
    if M.size == 0:
        return np.zeros_like(M, dtype=complex)
    w, V = np.linalg.eigh(hermitian_part(M))
    w = np.clip(w, 0.0, None)
    return (V * np.sqrt(w)) @ V.conj().T


def range_basis(M: np.ndarray, rel_tol: float = 1e-10, abs_tol: float = 0.0) -> np.ndarray:
    """Orthonormal basis of the numerical column space of ``M``."""
    n = M.shape[0]
    if M.size == 0:
        return np.zeros((n, 0), dtype=complex)
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((n, 0), dtype=complex)
    keep = s > max(rel_tol * s[0], abs_tol)
    return U[:, keep]


def null_space(M: np.ndarray, rel_tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of the numerical kernel of ``M`` (columns)."""
    n = M.shape[1]
    if M.shape[0] == 0 or n == 0:
        return np.eye(n, dtype=complex)
    _, s, Vh = np.linalg.svd(M, full_matrices=True)
    scale = s[0] if s.size and s[0] > 0 else 1.0
    rank = int(np.sum(s > rel_tol * scale))
    return Vh[rank:].conj().T


def canonical_basis(Q: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Deterministic orthonormal basis for ``span(Q)``.

    Gram-Schmidt is applied to the projections of the coordinate vectors in
    index order, so the result does not depend on how ``Q`` was produced and
    each basis vector has a positive entry at its leading coordinate.
    """
    n, k = Q.shape
    if k == 0:
        return np.zeros((n, 0), dtype=complex)
    P = Q @ Q.conj().T
    out: list[np.ndarray] = []
    for i in range(n):
        v = P[:, i].copy()
        for b in out:
            v -= (b.conj() @ v) * b
        for b in out:
            v -= (b.conj() @ v) * b
        nv = np.linalg.norm(v)
        if nv > tol:
            out.append(v / nv)
            if len(out) == k:
                break
    return np.column_stack(out) if out else np.zeros((n, 0), dtype=complex)


def psd_factor(M: np.ndarray, tol: float) -> np.ndarray:
    """Rank-minimal factor ``L`` with ``L L^* = M`` up to discarded eigenvalues.

    Eigenvalues at or below ``tol * max(1, ||M||)`` are treated as zero.  The
    columns are ``M^{1/2}`` applied to a canonical basis of the range, which
    makes the factor reproducible.
    """
    n = M.shape[0]
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    H = hermitian_part(M)
    w, V = np.linalg.eigh(H)
    thresh = tol * max(1.0, float(np.max(np.abs(w))))
    keep = w > thresh
    if not np.any(keep):
        return np.zeros((n, 0), dtype=complex)
    Q = canonical_basis(V[:, keep])
    root = (V[:, keep] * np.sqrt(w[keep])) @ V[:, keep].conj().T
    return root @ Q


def max_principal_angle(Q1: np.ndarray, Q2: np.ndarray) -> float:
    if Q1.shape[1] != Q2.shape[1]:
        return float(np.pi / 2)
    if Q1.shape[1] == 0:
        return 0.0
    return float(np.max(sla.subspace_angles(Q1, Q2)))


def random_ball_points(n: int, d: int, radius: float, rng: np.random.Generator) -> np.ndarray:
    """``n`` points drawn uniformly from the complex ball of the given radius."""
    z = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    r = radius * rng.random(n) ** (1.0 / (2 * d))
    return z * r[:, None]
