"""Observability operators, gramians and stability of output pairs.

The observability operator of ``(C, A)`` maps a state ``x`` to the power
series ``C (I - Z(lambda) A)^{-1} x``.  Its gramian solves the Stein equation
``G = C^* C + sum_j A_j^* G A_j`` and exists when the pair is output stable.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import mindex
from ._linalg import hermitian_part, range_basis, spectral_norm
from .colligation import OutputPair
from .errors import GramianDivergenceError, InputError, NotExactlyObservableError

# Superoperator doubling is O(p^6); beyond this state dimension plain sweeps are used.
DOUBLING_MAX_STATE = 16
# Direct solve of the vectorized Stein equation is O(p^6) as well.
DIRECT_MAX_STATE = 40


def cp_map(A: np.ndarray, X: np.ndarray) -> np.ndarray:
    """``Phi(X) = sum_j A_j^* X A_j``."""
    return np.einsum("jki,kl,jlm->im", A.conj(), X, A)


def resolvent_series(pair: OutputPair, cap: int) -> mindex.TruncatedSeries:
    """Taylor series of ``(I - Z(lambda) A)^{-1}`` through degree ``cap``."""
    p, d = pair.dim_state, pair.d
    return mindex.neumann_inverse(
        mindex.identity(d, cap, p) - mindex.linear_pencil(pair.A, cap), cap
    )


def observability_series(pair: OutputPair, cap: int) -> mindex.TruncatedSeries:
    """``C (I - Z(lambda) A)^{-1}`` as an ``r x p`` matrix-valued series."""
    return resolvent_series(pair, cap).left(pair.C)


def observability_apply(pair: OutputPair, x, cap: int) -> mindex.TruncatedSeries:
    """The function ``C (I - Z(lambda)A)^{-1} x`` through degree ``cap``.

    For commuting ``A`` the coefficient at ``n`` is ``weight(n) C A^n x``.
    """
    x = np.asarray(x, dtype=complex).reshape(-1, 1)
    if x.shape[0] != pair.dim_state:
        raise InputError(f"state vector has length {x.shape[0]}, expected {pair.dim_state}")
    return observability_series(pair, cap).right(x)


def observability_matrix(pair: OutputPair, cap: int) -> np.ndarray:
    """Truncated observability operator in orthonormal monomial coordinates."""
    basis = mindex.MonomialBasis(pair.d, cap, pair.dim_output)
    return basis.coords(observability_series(pair, cap))


def observability_range(pair: OutputPair, cap: int, rel_tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of the truncated range of the observability operator."""
    return range_basis(observability_matrix(pair, cap), rel_tol)


def _superoperator(A: np.ndarray) -> np.ndarray:
    # vec is numpy's row-major flatten: vec(P X Q) = kron(P, Q^T) vec(X)
    p = A.shape[1]
    M = np.zeros((p * p, p * p), dtype=complex)
    for Aj in A:
        M += np.kron(Aj.conj().T, Aj.T)
    return M


def stein_residual(pair: OutputPair, G: np.ndarray) -> float:
    return spectral_norm(G - pair.C.conj().T @ pair.C - cp_map(pair.A, G))


def gramian(pair: OutputPair, tol: float = 1e-12, max_iter: int = 100_000) -> np.ndarray:
    """Observability gramian ``O^* O`` of the pair.

    Solves ``G = C^*C + Phi(G)`` with ``Phi(X) = sum_j A_j^* X A_j``.  For small
    state spaces the partial sums are doubled, ``G_{2N} = G_N + Phi^N(G_N)``,
    with ``Phi^N`` squared as a superoperator; otherwise plain fixed-point
    sweeps are used, falling back to a direct vectorized solve when they stall.
    ``max_iter`` bounds the number of series terms summed.  Convergence means
    the Stein residual is at most ``tol * max(1, ||G||)``.

    Raises
    ------
    GramianDivergenceError
        If the series does not converge within ``max_iter`` terms.
    """
    p = pair.dim_state
    Q = pair.C.conj().T @ pair.C
    if p == 0:
        return np.zeros((0, 0), dtype=complex)
    if p <= DOUBLING_MAX_STATE:
        G = _gramian_doubling(pair, Q, tol, max_iter)
    else:
        G = _gramian_sweeps(pair, Q, tol, max_iter)
    return hermitian_part(G)


def _converged(pair: OutputPair, G: np.ndarray, tol: float) -> bool:
    return stein_residual(pair, G) <= tol * max(1.0, spectral_norm(G))


def _gramian_doubling(pair, Q, tol, max_iter):
    p = pair.dim_state
    Mn = _superoperator(pair.A)
    g = Q.reshape(-1) + Mn @ Q.reshape(-1)
    terms = 2
    while True:
        # one extra sweep gives the next partial sum and damps round-off from squaring
        G = Q + cp_map(pair.A, g.reshape(p, p))
        if _converged(pair, G, tol):
            return G
        if not np.all(np.isfinite(g)) or spectral_norm(G) > 1e15:
            raise GramianDivergenceError("gramian series diverges (pair is not output stable)")
        if terms >= max_iter:
            raise GramianDivergenceError(
                f"gramian series has not converged after {terms} terms"
            )
        Mn = Mn @ Mn
        g = g + Mn @ g
        terms *= 2


def _gramian_sweeps(pair, Q, tol, max_iter):
    G = Q.copy()
    prev = np.inf
    for _ in range(max_iter):
        G_next = Q + cp_map(pair.A, G)
        step = spectral_norm(G_next - G)
        G = G_next
        if _converged(pair, G, tol):
            return G
        if not np.all(np.isfinite(G)) or spectral_norm(G) > 1e15:
            raise GramianDivergenceError("gramian series diverges (pair is not output stable)")
        if step >= prev and step > tol:
            break
        prev = step
    if pair.dim_state <= DIRECT_MAX_STATE:
        p = pair.dim_state
        M = np.eye(p * p) - _superoperator(pair.A)
        G = np.linalg.solve(M, Q.reshape(-1)).reshape(p, p)
        if np.all(np.isfinite(G)) and _converged(pair, G, tol) and np.min(np.linalg.eigvalsh(hermitian_part(G))) > -tol:
            return G
    raise GramianDivergenceError("gramian fixed-point iteration did not converge")


@dataclass(frozen=True)
class StabilityReport:
    """Outcome of iterating ``Phi`` on the identity.

    ``decay`` holds ``trace Phi^N(I)`` for ``N = 0, 1, ...``; ``steps`` is the
    first ``N`` at which it fell below the tolerance, or ``None``.
    """

    stable: bool
    inconclusive: bool
    steps: int | None
    decay: tuple[float, ...]
    tol: float


def strong_stability(A, tol: float = 1e-12, max_iter: int = 5000) -> StabilityReport:
    """Decide strong stability by watching ``trace Phi^N(I)`` decay to zero.

    If ``max_iter`` is reached while the trace is still strictly decreasing the
    report is marked inconclusive rather than unstable.
    """
    A = np.asarray(A, dtype=complex)
    p = A.shape[1]
    X = np.eye(p, dtype=complex)
    decay = [float(np.trace(X).real)]
    if decay[0] < tol:
        return StabilityReport(True, False, 0, tuple(decay), tol)
    for n in range(1, max_iter + 1):
        X = cp_map(A, X)
        t = float(np.trace(X).real)
        decay.append(t)
        if t < tol:
            return StabilityReport(True, False, n, tuple(decay), tol)
        if not np.isfinite(t) or t > 1e12 * max(decay[0], 1.0):
            return StabilityReport(False, False, None, tuple(decay), tol)
    tail = decay[-min(len(decay), 11):]
    still_falling = all(b < a for a, b in zip(tail, tail[1:]))
    return StabilityReport(False, still_falling, None, tuple(decay), tol)


def renormalize_exactly_observable(pair: OutputPair, tol: float = 1e-10) -> OutputPair:
    """Similarity ``H^{1/2}`` (``H`` the gramian) turning the pair isometric.

    Returns ``(C H^{-1/2}, H^{1/2} A_j H^{-1/2})``.  The range of the
    observability operator, and so the annihilated subspace, is unchanged.

    Raises
    ------
    NotExactlyObservableError
        If the smallest eigenvalue of ``H`` is at most ``tol``.
    """
    H = gramian(pair)
    w, V = np.linalg.eigh(H)
    if w.size and w[0] <= tol:
        raise NotExactlyObservableError(
            f"gramian has smallest eigenvalue {w[0]:.3e}; pair is not exactly observable"
        )
    root = (V * np.sqrt(w)) @ V.conj().T
    inv_root = (V / np.sqrt(w)) @ V.conj().T
    A = np.array([root @ Aj @ inv_root for Aj in pair.A])
    return OutputPair(pair.C @ inv_root, A)


def annihilator_residual(pair: OutputPair, f: mindex.TruncatedSeries) -> np.ndarray:
    """Adjoint of the observability operator applied to ``f``.

    For commuting ``A`` this is ``sum_n A^{*n} C^* f_n``; in general the word
    sums ``R_n`` of ``(I - Z A)^{-1}`` enter as ``R_n^* / weight(n)``, which is
    what makes ``<f, O x> = <annihilator_residual(f), x>`` hold.  ``f``
    belongs to the annihilated subspace exactly when the result vanishes.
    """
    if f.d != pair.d or f.shape != (pair.dim_output, 1):
        raise InputError("f must be a C^r-valued series in the pair's variables")
    return _annihilate(pair, resolvent_series(pair, max(f.degree, 0)), f)


def _annihilate(pair: OutputPair, R: mindex.TruncatedSeries, f: mindex.TruncatedSeries) -> np.ndarray:
    # R must be the resolvent series through at least the degree of f
    Cstar = pair.C.conj().T
    out = np.zeros(pair.dim_state, dtype=complex)
    for n, fn in f.items():
        Rn = R.coeffs.get(n)
        if Rn is None or not np.any(fn):
            continue
        out += (Rn.conj().T @ (Cstar @ fn)).reshape(-1) / mindex.weight(n)
    return out
