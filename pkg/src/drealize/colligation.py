"""Block colligations and their transfer functions.

A colligation on state space ``C^p``, input ``C^q`` and output ``C^r`` is the
block operator

    U = [[A_1, B_1], ..., [A_d, B_d], [C, D]]  :  C^p + C^q  ->  (C^p)^d + C^r

and its transfer function is ``S(lambda) = D + C (I - Z(lambda) A)^{-1} Z(lambda) B``
with ``Z(lambda) A = sum_j lambda_j A_j``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import mindex
from ._linalg import as_complex, frozen, psd_factor, spectral_norm
from .errors import InconclusiveError, InputError, NotContractiveError, SingularResolventError

RESOLVENT_COND_LIMIT = 1e13


def _check_point(lam, d: int) -> np.ndarray:
    lam = np.asarray(lam, dtype=complex).reshape(-1)
    if lam.shape[0] != d:
        raise InputError(f"point has {lam.shape[0]} coordinates, expected {d}")
    return lam


@dataclass(frozen=True, eq=False)
class OutputPair:
    """An output pair ``(C, A)``: ``C`` is ``r x p`` and ``A`` stacks ``d`` matrices ``p x p``."""

    C: np.ndarray
    A: np.ndarray

    def __post_init__(self):
        C = as_complex(self.C)
        A = as_complex(self.A)
        if A.ndim != 3 or A.shape[1] != A.shape[2]:
            raise InputError(f"A must have shape (d, p, p), got {A.shape}")
        if C.ndim != 2 or C.shape[1] != A.shape[1]:
            raise InputError(f"C must have shape (r, {A.shape[1]}), got {C.shape}")
        if A.shape[0] < 1:
            raise InputError("need at least one variable")
        object.__setattr__(self, "C", frozen(C))
        object.__setattr__(self, "A", frozen(A))

    @property
    def d(self) -> int:
        return self.A.shape[0]

    @property
    def dim_state(self) -> int:
        return self.A.shape[1]

    @property
    def dim_output(self) -> int:
        return self.C.shape[0]

    def stacked(self) -> np.ndarray:
        """``[A_1; ...; A_d; C]`` as a ``(d p + r) x p`` matrix."""
        return np.vstack(list(self.A) + [self.C])

    def resolvent(self, lam) -> np.ndarray:
        """``(I - Z(lambda) A)^{-1}``."""
        lam = _check_point(lam, self.d)
        M = np.eye(self.dim_state, dtype=complex) - np.tensordot(lam, self.A, axes=1)
        return _safe_inverse_apply(M, np.eye(self.dim_state, dtype=complex), lam)

    def output_row(self, lam) -> np.ndarray:
        """``C (I - Z(lambda) A)^{-1}``, an ``r x p`` matrix."""
        lam = _check_point(lam, self.d)
        M = np.eye(self.dim_state, dtype=complex) - np.tensordot(lam, self.A, axes=1)
        return _safe_inverse_apply(M.T, self.C.T, lam).T

    def isometric_residual(self) -> float:
        """``|| sum_j A_j^* A_j + C^* C - I ||``."""
        G = self.stacked()
        return spectral_norm(G.conj().T @ G - np.eye(self.dim_state))

    def commutator_residual(self) -> float:
        return commutator_residual(self.A)


def commutator_residual(A: np.ndarray) -> float:
    worst = 0.0
    for i in range(A.shape[0]):
        for j in range(i + 1, A.shape[0]):
            worst = max(worst, spectral_norm(A[i] @ A[j] - A[j] @ A[i]))
    return worst


def _safe_inverse_apply(M: np.ndarray, rhs: np.ndarray, lam: np.ndarray) -> np.ndarray:
    if M.shape[0] == 0:
        return rhs.copy()
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > RESOLVENT_COND_LIMIT:
        raise SingularResolventError(lam, cond)
    try:
        return np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError:
        raise SingularResolventError(lam, np.inf) from None


@dataclass(frozen=True, eq=False)
class Colligation:
    """Block operator ``[[A, B], [C, D]]`` with ``A, B`` stacked over ``d`` variables.

    Shapes: ``A`` is ``(d, p, p)``, ``B`` is ``(d, p, q)``, ``C`` is ``(r, p)`` and
    ``D`` is ``(r, q)``.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        A, B, C, D = (as_complex(x) for x in (self.A, self.B, self.C, self.D))
        if A.ndim != 3 or A.shape[1] != A.shape[2] or A.shape[0] < 1:
            raise InputError(f"A must have shape (d, p, p), got {A.shape}")
        d, p = A.shape[0], A.shape[1]
        if B.ndim != 3 or B.shape[:2] != (d, p):
            raise InputError(f"B must have shape ({d}, {p}, q), got {B.shape}")
        q = B.shape[2]
        if C.ndim != 2 or C.shape[1] != p:
            raise InputError(f"C must have shape (r, {p}), got {C.shape}")
        r = C.shape[0]
        if D.shape != (r, q):
            raise InputError(f"D must have shape ({r}, {q}), got {D.shape}")
        for name, val in zip("ABCD", (A, B, C, D)):
            object.__setattr__(self, name, frozen(val))

    @classmethod
    def from_blocks(cls, AC: np.ndarray, BD: np.ndarray, d: int, p: int) -> "Colligation":
        """Split the columns ``[A; C]`` and ``[B; D]`` of ``U`` into blocks."""
        AC = as_complex(AC, 2)
        BD = as_complex(BD, 2)
        A = AC[: d * p].reshape(d, p, p)
        C = AC[d * p:]
        B = BD[: d * p].reshape(d, p, BD.shape[1])
        D = BD[d * p:]
        return cls(A, B, C, D)

    @property
    def d(self) -> int:
        return self.A.shape[0]

    @property
    def dim_state(self) -> int:
        return self.A.shape[1]

    @property
    def dim_input(self) -> int:
        return self.B.shape[2]

    @property
    def dim_output(self) -> int:
        return self.C.shape[0]

    @property
    def pair(self) -> OutputPair:
        return OutputPair(self.C, self.A)

    @property
    def U(self) -> np.ndarray:
        rows = self.d * self.dim_state
        top = np.hstack([self.A.reshape(rows, self.dim_state), self.B.reshape(rows, self.dim_input)])
        bottom = np.hstack([self.C, self.D])
        return np.vstack([top, bottom])

    def transfer(self, lam) -> np.ndarray:
        return transfer_eval(self, lam)


def transfer_eval(col: Colligation, lam) -> np.ndarray:
    """Evaluate ``S(lambda) = D + C (I - Z(lambda)A)^{-1} Z(lambda) B`` by LU solve.

    Raises
    ------
    SingularResolventError
        Naming ``lam`` when ``I - Z(lambda)A`` is numerically singular.
    """
    lam = _check_point(lam, col.d)
    row = col.pair.output_row(lam)
    ZB = np.tensordot(lam, col.B, axes=1)
    return col.D + row @ ZB


def taylor(col: Colligation, cap: int) -> mindex.TruncatedSeries:
    """Taylor coefficients of the transfer function through total degree ``cap``."""
    p, d = col.dim_state, col.d
    R = mindex.neumann_inverse(
        mindex.identity(d, cap, p) - mindex.linear_pencil(col.A, cap), cap
    )
    X = mindex.series_mul(R, mindex.linear_pencil(col.B, cap), cap)
    return X.left(col.C) + mindex.constant(d, cap, col.D)


@dataclass(frozen=True)
class StructureReport:
    contractive: bool
    isometric: bool
    coisometric: bool
    unitary: bool
    commutative: bool
    norm: float
    isometry_residual: float
    coisometry_residual: float
    commutator_residual: float
    tol: float


def structure_report(col: Colligation, tol: float = 1e-10) -> StructureReport:
    """Classify ``U`` as contractive / isometric / coisometric / unitary.

    Each flag is a residual compared with ``tol``: ``||U|| <= 1 + tol``,
    ``||U^*U - I||``, ``||UU^* - I||`` and the largest commutator of ``A``.
    """
    U = col.U
    norm = spectral_norm(U)
    iso = spectral_norm(U.conj().T @ U - np.eye(U.shape[1]))
    coiso = spectral_norm(U @ U.conj().T - np.eye(U.shape[0]))
    comm = commutator_residual(col.A)
    return StructureReport(
        contractive=norm <= 1 + tol,
        isometric=iso <= tol,
        coisometric=coiso <= tol,
        unitary=iso <= tol and coiso <= tol,
        commutative=comm <= tol,
        norm=norm,
        isometry_residual=iso,
        coisometry_residual=coiso,
        commutator_residual=comm,
        tol=tol,
    )


def coisometric_extension(col: Colligation, tol: float = 1e-10) -> Colligation:
    """Append input columns ``(I - UU^*)^{1/2} J`` so the result is coisometric.

    ``J`` is an isometric selection onto the numerical range of ``I - UU^*``;
    the added input dimension is its rank.  The transfer function of the
    result is ``[S, S_extra]``.
    """
    U = col.U
    if spectral_norm(U) > 1 + tol:
        raise NotContractiveError(f"||U|| = {spectral_norm(U):.6g} exceeds 1")
    M = np.eye(U.shape[0]) - U @ U.conj().T
    E = psd_factor(M, tol)
    BD = np.hstack([np.vstack([col.B.reshape(col.d * col.dim_state, col.dim_input), col.D]), E])
    AC = np.vstack([col.A.reshape(col.d * col.dim_state, col.dim_state), col.C])
    return Colligation.from_blocks(AC, BD, col.d, col.dim_state)


@dataclass(frozen=True, eq=False)
class EquivalenceResult:
    equivalent: bool
    witness: np.ndarray
    residual: float
    unitarity_defect: float
    word_length: int
    tol: float


def word_observability(pair: OutputPair, cap: int) -> np.ndarray:
    """Rows ``C A_w`` for every word ``w`` of length ``<= cap``.

    Each word carries unit weight; for commuting tuples this has the same Gram
    matrix as one row ``sqrt(weight(n)) C A^n`` per abelianized index ``n``.
    """
    blocks = [pair.C]
    level = pair.C
    for _ in range(cap):
        level = np.vstack([level @ Aj for Aj in pair.A])
        blocks.append(level)
    return np.vstack(blocks)


def unitary_equivalence(
    first: OutputPair, second: OutputPair, cap: int = 8, tol: float = 1e-8
) -> EquivalenceResult:
    """Test whether ``C_1 = C_2 W`` and ``A_{1,j} = W^* A_{2,j} W`` for a unitary ``W``.

    ``W`` is the least-squares solution of ``O_2 W = O_1`` where ``O_i`` stacks
    the word observability rows of each pair.  The pairs are declared
    equivalent when both the residual and ``||W^* W - I||`` are below ``tol``.

    Raises
    ------
    InconclusiveError
        If either stacked matrix is rank deficient at this word length.
    """
    if first.d != second.d or first.dim_output != second.dim_output:
        raise InputError("pairs must share the number of variables and output space")
    if first.dim_state != second.dim_state:
        return EquivalenceResult(False, np.zeros((second.dim_state, first.dim_state)),
                                 np.inf, np.inf, cap, tol)
    O1 = word_observability(first, cap)
    O2 = word_observability(second, cap)
    for name, O in (("first", O1), ("second", O2)):
        s = np.linalg.svd(O, compute_uv=False)
        if s.size < O.shape[1] or s[-1] <= 1e-10 * max(s[0], 1e-300):
            raise InconclusiveError(
                f"{name} pair is not observable through words of length {cap}"
            )
    W, *_ = np.linalg.lstsq(O2, O1, rcond=None)
    residual = spectral_norm(O2 @ W - O1)
    defect = spectral_norm(W.conj().T @ W - np.eye(W.shape[1]))
    return EquivalenceResult(
        equivalent=residual <= tol and defect <= tol,
        witness=W,
        residual=residual,
        unitarity_defect=defect,
        word_length=cap,
        tol=tol,
    )

