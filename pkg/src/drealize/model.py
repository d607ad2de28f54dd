"""Functional-model realizations of polynomial multipliers.

For a polynomial inner multiplier ``S`` the space ``H(K_S)`` is the
orthogonal complement of the range of multiplication by ``S``.  The backward
shifts compress to ``H(K_S)``, evaluation at the origin gives the output map,
and every weakly coisometric realization on that state space differs only in
how the input operator acts off the subspace ``D``.  That freedom is a
contraction ``X`` from the complement of ``D`` into the common kernel of the
Taylor coefficients of ``S``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import mindex
from ._linalg import (
    canonical_basis,
    hermitian_part,
    null_space,
    psd_sqrt,
    random_ball_points,
    range_basis,
    spectral_norm,
)
from .colligation import Colligation, OutputPair
from .errors import (
    CaptureError,
    HypothesisError,
    InputError,
    NonInvariantError,
    NotContractiveError,
    RealizationError,
)
from .kernels import DSubspace, ball_inner, d_subspace, sampled_generators
from .observability import strong_stability


@dataclass(frozen=True, eq=False)
class FunctionSubspace:
    """Subspace of ``C^r``-valued polynomials of degree ``<= cap``.

    ``Q`` holds orthonormal coordinate columns in ``basis``
    (:class:`~drealize.mindex.MonomialBasis`), so Drury-Arveson inner products
    are Euclidean ones.
    """

    basis: mindex.MonomialBasis
    Q: np.ndarray

    @property
    def dim(self) -> int:
        return self.Q.shape[1]

    @property
    def d(self) -> int:
        return self.basis.d

    @property
    def dim_value(self) -> int:
        return self.basis.dim

    def elements(self) -> list[mindex.TruncatedSeries]:
        return [self.basis.series(self.Q[:, k]) for k in range(self.dim)]

    def values(self, lam) -> np.ndarray:
        """``r x dim`` matrix whose columns are the basis functions at ``lam``."""
        return self.basis.evaluation_matrix(lam) @ self.Q

    def kernel(self, lam, zeta) -> np.ndarray:
        """Reproducing kernel ``sum_k e_k(lambda) e_k(zeta)^*`` of the subspace."""
        return self.values(lam) @ self.values(zeta).conj().T


def span_of(series: list[mindex.TruncatedSeries], rel_tol: float = 1e-10) -> FunctionSubspace:
    """Orthonormalized span of a list of column series sharing ``d``, ``cap`` and ``r``."""
    if not series:
        raise InputError("need at least one function")
    f0 = series[0]
    basis = mindex.MonomialBasis(f0.d, f0.cap, f0.shape[0])
    M = np.hstack([basis.coords(f) for f in series])
    return FunctionSubspace(basis, canonical_basis(range_basis(M, rel_tol)))


def multiplication_matrix(S: mindex.TruncatedSeries, K: int):
    """Matrix of ``M_S`` from inputs of degree ``<= K`` to outputs of degree ``<= K + deg S``.

    Returns ``(M, input_basis, output_basis)``; both bases are orthonormal
    monomial coordinate systems.
    """
    r, q = S.shape
    degS = max(S.degree, 0)
    inb = mindex.MonomialBasis(S.d, K, q)
    outb = mindex.MonomialBasis(S.d, K + degS, r)
    M = np.zeros((outb.size, inb.size), dtype=complex)
    for m in inb.indices:
        wm = mindex.weight(m)
        cols = inb.slot(m)
        for k, Sk in S.items():
            if not np.any(Sk):
                continue
            n = tuple(a + b for a, b in zip(m, k))
            scale = np.sqrt(wm / mindex.weight(n))
            M[outb.slot(n), cols] += scale * Sk
    return M, inb, outb


def multiplier_gram(S: mindex.TruncatedSeries, K: int) -> np.ndarray:
    """Gram matrix ``<S e_m u, S e_n v>`` of ``M_S^* M_S`` on inputs of degree ``<= K``.

    ``e_m = sqrt(weight(m)) lambda^m`` is the orthonormal (weighted) monomial
    basis; rows and columns follow grlex order with the input coordinate
    varying fastest.
    """
    M, _, _ = multiplication_matrix(S, K)
    return M.conj().T @ M


@dataclass(frozen=True)
class PartialIsometryReport:
    passed: bool
    defect: float
    degree: int
    tol: float


def partial_isometry_test(S: mindex.TruncatedSeries, K: int, tol: float = 1e-10) -> PartialIsometryReport:
    """Check ``(M_S^* M_S)^2 = M_S^* M_S`` on inputs of degree ``<= K``.

    ``M_S^* M_S`` maps degree ``<= K`` inputs into degree ``<= K + deg S``
    inputs, so the Gram matrix built at that larger degree gives the square
    without truncation error.
    """
    degS = max(S.degree, 0)
    G = multiplier_gram(S, K + degS)
    n_in = len(mindex.indices_up_to(S.d, K)) * S.shape[1]
    GJ = G[:, :n_in]
    defect = spectral_norm(G @ GJ - GJ)
    return PartialIsometryReport(defect <= tol, defect, K, tol)


def _poly_eval(S: mindex.TruncatedSeries):
    return lambda lam: S.evaluate(lam)


def hks_subspace(S: mindex.TruncatedSeries, N: int, tol: float = 1e-9,
                 n_check: int = 8, seed: int = 0) -> FunctionSubspace:
    """``H(K_S)`` for a polynomial inner ``S``, computed inside degree ``<= N``.

    The orthocomplement of ``{S lambda^m u : |m| <= N - deg S}`` is taken among
    polynomials of degree ``<= N - deg S``, where it is exact.  The result is
    validated by comparing its reproducing kernel with ``K_S`` at ``n_check``
    random points of radius 0.5.

    Raises
    ------
    CaptureError
        If the kernels disagree by more than ``tol``; raising ``N`` helps when
        ``H(K_S)`` is finite dimensional.
    """
    degS = max(S.degree, 0)
    if N < degS:
        raise InputError(f"degree cap {N} is below deg S = {degS}")
    low = N - degS
    M, _, outb = multiplication_matrix(S, low)
    keep = outb.coordinate_degrees() <= low
    W_low = null_space(M[keep].conj().T)
    basis = mindex.MonomialBasis(S.d, low, S.shape[0])
    space = FunctionSubspace(basis, canonical_basis(W_low))
    rng = np.random.default_rng(seed)
    pts = random_ball_points(n_check, S.d, 0.5, rng)
    Sev = _poly_eval(S)
    r = S.shape[0]
    worst = 0.0
    for lam in pts:
        Sl = Sev(lam)
        for zeta in pts:
            KS = (np.eye(r) - Sl @ Sev(zeta).conj().T) / (1 - ball_inner(lam, zeta))
            worst = max(worst, spectral_norm(KS - space.kernel(lam, zeta)))
    if worst > tol:
        raise CaptureError(
            f"H(K_S) not captured at degree cap {N} (kernel mismatch {worst:.3e}); raise N"
        )
    return space


@dataclass(frozen=True, eq=False)
class GleasonReport:
    """Closure of a subspace under the backward shifts.

    ``closure`` is ``dim x d``: the distance of each shifted basis vector from
    the span.  ``worst`` is ``(basis index, axis, residual)``.
    """

    invariant: bool
    closure: np.ndarray
    worst: tuple[int, int, float]
    contractive_gap: float
    tol: float


def gleason_model_pair(space: FunctionSubspace, tol: float = 1e-9):
    """Backward shifts compressed to ``space`` plus evaluation at the origin.

    Returns ``(pair, report)`` where ``A_j`` is the backward shift along axis
    ``j`` and ``C`` evaluates at 0.  ``report.contractive_gap`` is the smallest
    eigenvalue of ``I - sum_j A_j^*A_j - C^*C`` and is non-negative up to
    round-off for an invariant subspace.

    Raises
    ------
    NonInvariantError
        Naming the basis vector and axis whose shift leaves the span.
    """
    Q = space.Q
    d = space.d
    A = np.zeros((d, space.dim, space.dim), dtype=complex)
    closure = np.zeros((space.dim, d))
    for j in range(d):
        image = space.basis.shift_adjoint_matrix(j) @ Q
        A[j] = Q.conj().T @ image
        closure[:, j] = np.linalg.norm(image - Q @ A[j], axis=0)
    C = space.basis.evaluation_matrix(np.zeros(d)) @ Q
    pair = OutputPair(C, A)
    G = pair.stacked()
    gap = float(np.min(np.linalg.eigvalsh(np.eye(space.dim) - hermitian_part(G.conj().T @ G)),
                       initial=0.0))
    if closure.size:
        k, j = np.unravel_index(int(np.argmax(closure)), closure.shape)
        worst = (int(k), int(j), float(closure[k, j]))
    else:
        worst = (-1, -1, 0.0)
    report = GleasonReport(worst[2] <= tol, closure, worst, gap, tol)
    if not report.invariant:
        raise NonInvariantError(report)
    return pair, report


@dataclass(frozen=True, eq=False)
class ModelRealizationFamily:
    """All weakly coisometric realizations of ``S`` on the model state space.

    ``B_core`` (``q x dim D``) is ``B^*`` restricted to ``D`` in the basis
    ``dsub.basis``; ``kernel_basis`` spans the common kernel ``U_S^0`` of the
    Taylor coefficients; ``complement`` spans the complement of ``D``.
    Each member is fixed by a contraction ``X`` of shape
    ``(dim U_S^0, dim complement)``.
    """

    S: mindex.TruncatedSeries
    space: FunctionSubspace
    pair: OutputPair
    D: np.ndarray
    dsub: DSubspace
    B_core: np.ndarray
    kernel_basis: np.ndarray
    complement: np.ndarray
    fit_residual: float

    @property
    def parameter_shape(self) -> tuple[int, int]:
        return (self.kernel_basis.shape[1], self.complement.shape[1])

    @property
    def unique(self) -> bool:
        return 0 in self.parameter_shape


def taylor_kernel(S: mindex.TruncatedSeries, rel_tol: float = 1e-10) -> np.ndarray:
    """Canonical orthonormal basis of ``{u : S_n u = 0 for all n}``."""
    stacked = np.vstack([c for _, c in S.items()]) if S.coeffs else np.zeros((0, S.shape[1]))
    return canonical_basis(null_space(stacked, rel_tol))


def model_family(S: mindex.TruncatedSeries, space: FunctionSubspace, pair: OutputPair,
                 tol: float = 1e-9, seed: int = 0) -> ModelRealizationFamily:
    """Parametrize the weakly coisometric realizations of ``S`` on ``space``.

    On ``D`` the input operator is forced: ``B^*`` sends the generator
    ``Z(zeta)^*(I - A^*Z(zeta)^*)^{-1}C^* y`` to ``S(zeta)^* y - S(0)^* y``.  It is
    fitted by least squares over ``2 dim D`` (or more) sampled ``zeta``.

    Raises
    ------
    RealizationError
        If the fit residual exceeds ``tol``, meaning ``S`` is not realized on
        this state space.
    """
    d = pair.d
    zero = np.zeros(d)
    D = S.evaluate(zero)
    dsub = d_subspace(pair, seed=seed)
    V = dsub.basis
    m = V.shape[1]
    rng = np.random.default_rng(seed)
    npts = max(2 * m, 2)
    for _ in range(6):
        pts = random_ball_points(npts, d, 0.7, rng)
        G = sampled_generators(pair, pts)
        coeff = V.conj().T @ G
        if m == 0 or np.linalg.matrix_rank(coeff, tol=1e-8 * max(1.0, spectral_norm(coeff))) == m:
            break
        npts *= 2
    else:
        raise RealizationError("sampled generators do not span D")
    rhs = np.hstack([S.evaluate(z).conj().T - D.conj().T for z in pts])
    if m:
        sol, *_ = np.linalg.lstsq(coeff.T, rhs.T, rcond=None)
        B_core = sol.T
    else:
        B_core = np.zeros((S.shape[1], 0), dtype=complex)
    fit = spectral_norm(B_core @ coeff - rhs) + spectral_norm(G - V @ coeff)
    if fit > tol * max(1.0, spectral_norm(rhs)):
        raise RealizationError(
            f"S is not realized on this state space (fit residual {fit:.3e})"
        )
    return ModelRealizationFamily(S, space, pair, D, dsub, B_core, taylor_kernel(S),
                                  dsub.complement(), fit)


def assemble(family: ModelRealizationFamily, X=None, tol: float = 1e-10) -> Colligation:
    """The member of ``family`` with free parameter ``X`` (zero when omitted).

    ``B^* = U0 X W^* + B_core V^*`` with ``U0``, ``W`` and ``V`` the bases of
    ``U_S^0``, the complement of ``D`` and ``D``.  The result is coisometric
    exactly when ``X`` is an isometry and unitary when ``X`` is unitary.
    """
    shape = family.parameter_shape
    X = np.zeros(shape, dtype=complex) if X is None else np.atleast_2d(np.asarray(X, dtype=complex))
    if X.shape != shape:
        raise InputError(f"parameter must have shape {shape}, got {X.shape}")
    if spectral_norm(X) > 1 + tol:
        raise NotContractiveError(f"parameter has norm {spectral_norm(X):.6g} > 1")
    V, W, U0 = family.dsub.basis, family.complement, family.kernel_basis
    Bstar = U0 @ X @ W.conj().T + family.B_core @ V.conj().T
    B = Bstar.conj().T
    pair = family.pair
    d, k = pair.d, pair.dim_state
    return Colligation(pair.A, B.reshape(d, k, -1), pair.C, family.D)


@dataclass(frozen=True, eq=False)
class RepresenterFamily:
    """Realizations ``[C (I - Z A)^{-1} Z|_D, I] (I - T^*T)^{1/2} G^*`` over isometries ``G``.

    ``T = [A^*|_D, C^*]`` maps ``D + Y`` to the state space; ``defect_root`` is
    ``(I - T^*T)^{1/2}`` and ``range_basis`` a canonical basis of its range,
    whose dimension ``rank`` is the smallest admissible input dimension.
    """

    pair: OutputPair
    dsub: DSubspace
    T: np.ndarray
    defect_root: np.ndarray
    range_basis: np.ndarray

    @property
    def rank(self) -> int:
        return self.range_basis.shape[1]

    def construct(self, G=None) -> Colligation:
        """Colligation for the isometry ``G`` (``q x rank``, default identity)."""
        G = np.eye(self.rank, dtype=complex) if G is None else np.asarray(G, dtype=complex)
        if G.ndim != 2 or G.shape[1] != self.rank:
            raise InputError(f"G must have {self.rank} columns")
        if spectral_norm(G.conj().T @ G - np.eye(self.rank)) > 1e-10:
            raise InputError("G must be an isometry")
        V = self.dsub.basis
        r = self.pair.dim_output
        embed = np.zeros((V.shape[0] + r, V.shape[1] + r), dtype=complex)
        embed[: V.shape[0], : V.shape[1]] = V
        embed[V.shape[0]:, V.shape[1]:] = np.eye(r)
        BD = embed @ self.defect_root @ self.range_basis @ G.conj().T
        return Colligation.from_blocks(self.pair.stacked(), BD, self.pair.d, self.pair.dim_state)


def representer_family(pair: OutputPair, tol: float = 1e-10) -> RepresenterFamily:
    """Representers of the subspace annihilated by an isometric, stable, commuting pair.

    Raises
    ------
    HypothesisError
        If the pair is not isometric, not commutative or not strongly stable.
    """
    if pair.isometric_residual() > tol:
        raise HypothesisError("pair is not isometric")
    if pair.commutator_residual() > tol:
        raise HypothesisError("pair is not commutative")
    if not strong_stability(pair.A).stable:
        raise HypothesisError("pair is not strongly stable")
    dsub = d_subspace(pair)
    Astar = np.hstack([Aj.conj().T for Aj in pair.A])
    T = np.hstack([Astar @ dsub.basis, pair.C.conj().T])
    E = np.eye(T.shape[1]) - T.conj().T @ T
    w, vecs = np.linalg.eigh(hermitian_part(E))
    keep = w > tol * max(1.0, float(np.max(np.abs(w), initial=0.0)))
    Qr = canonical_basis(vecs[:, keep])
    return RepresenterFamily(pair, dsub, T, psd_sqrt(E), Qr)
