"""Random test families shared by the unit tests and the acceptance gate."""
from __future__ import annotations

import numpy as np

from drealize._linalg import psd_factor
from drealize.charfun import RowContraction
from drealize.colligation import Colligation, OutputPair


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_unitary(rng, n):
    Q, R = np.linalg.qr(crandn(rng, n, n))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_contractive_colligation(rng, d=2, p=3, q=2, r=2, norm=0.9):
    """Colligation with ``||U|| = norm``."""
    U = crandn(rng, d * p + r, p + q)
    U *= norm / np.linalg.norm(U, 2)
    return Colligation.from_blocks(U[:, :p], U[:, p:], d, p)


def random_output_pair(rng, d=2, p=3, r=2, norm=0.9):
    """Output pair with ``||[A; C]|| = norm``, hence contractive and stable."""
    G = crandn(rng, d * p + r, p)
    G *= norm / np.linalg.norm(G, 2)
    return OutputPair(G[d * p:], G[:d * p].reshape(d, p, p))


def random_isometric_pair(rng, d=2, p=3, r=2):
    Q, _ = np.linalg.qr(crandn(rng, d * p + r, p))
    return OutputPair(Q[d * p:], Q[:d * p].reshape(d, p, p))


def coisometric_colligation(pair: OutputPair) -> Colligation:
    """Complete a contractive pair to a coisometric colligation."""
    G = pair.stacked()
    L = psd_factor(np.eye(G.shape[0]) - G @ G.conj().T, 1e-12)
    return Colligation.from_blocks(G, L, pair.d, pair.dim_state)


def random_coisometric_colligation(rng, d=2, p=3, r=2, norm=0.9):
    return coisometric_colligation(random_output_pair(rng, d, p, r, norm))


def random_commuting_row_contraction(rng, d=2, p=3, margin=0.95):
    """``T_j = W diag(t_j) W^*`` with ``sum_j |t_j|^2 <= margin^2`` entrywise."""
    t = crandn(rng, d, p)
    scale = margin * rng.uniform(0.1, 1.0, size=p) / np.linalg.norm(t, axis=0)
    t *= scale
    W = random_unitary(rng, p)
    return RowContraction(np.array([W @ np.diag(tj) @ W.conj().T for tj in t]))


def random_commuting_pair(rng, d=2, p=3, r=2, norm=0.9):
    """Commuting ``A_j = W diag(t_j) W^*`` and random ``C``, scaled to ``||[A; C]|| = norm``."""
    W = random_unitary(rng, p)
    A = np.array([W @ np.diag(crandn(rng, p)) @ W.conj().T for _ in range(d)])
    G = np.vstack([A.reshape(d * p, p), crandn(rng, r, p)])
    s = norm / np.linalg.norm(G, 2)
    return OutputPair(s * G[d * p:], s * A)


def padded_colligation(col: Colligation, extra: int = 2) -> Colligation:
    """Add unreachable state dimensions with zero rows in ``U``.

    The transfer function and the subspace ``D`` are unchanged, so a
    coisometric input becomes weakly coisometric but not coisometric.
    """
    d, p, q, r = col.d, col.dim_state, col.dim_input, col.dim_output
    A = np.zeros((d, p + extra, p + extra), dtype=complex)
    A[:, :p, :p] = col.A
    B = np.zeros((d, p + extra, q), dtype=complex)
    B[:, :p] = col.B
    C = np.hstack([col.C, np.zeros((r, extra))])
    return Colligation(A, B, C, col.D)
