"""Characteristic functions of row contractions.

A row contraction ``T = [T_1 ... T_d]`` has defect operators
``D_T = (I - T^*T)^{1/2}`` on ``(C^p)^d`` and ``D_{T^*} = (I - TT^*)^{1/2}`` on
``C^p``.  The Halmos dilation ``[[T^*, D_T], [D_{T^*}, -T]]`` restricted to the
defect spaces is unitary, and its transfer function is the characteristic
function ``theta_T``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._linalg import as_complex, canonical_basis, frozen, psd_sqrt, spectral_norm
from .colligation import Colligation, commutator_residual, structure_report
from .errors import InputError, NotContractiveError


@dataclass(frozen=True, eq=False)
class RowContraction:
    """``d`` operators ``T_j`` on ``C^p`` with ``sum_j T_j T_j^* <= I``."""

    T: np.ndarray

    def __post_init__(self):
        T = as_complex(self.T)
        if T.ndim != 3 or T.shape[1] != T.shape[2]:
            raise InputError(f"T must have shape (d, p, p), got {T.shape}")
        if spectral_norm(self.row(T)) > 1 + 1e-12:
            raise NotContractiveError("[T_1 ... T_d] is not a contraction")
        object.__setattr__(self, "T", frozen(T))

    @staticmethod
    def row(T) -> np.ndarray:
        return np.hstack(list(T))

    @property
    def d(self) -> int:
        return self.T.shape[0]

    @property
    def dim(self) -> int:
        return self.T.shape[1]


@dataclass(frozen=True, eq=False)
class DefectSpaces:
    DT: np.ndarray       # (I - T^*T)^{1/2} on (C^p)^d
    DTstar: np.ndarray   # (I - TT^*)^{1/2} on C^p
    basis_T: np.ndarray
    basis_Tstar: np.ndarray


def defect_spaces(T: RowContraction, tol: float = 1e-10) -> DefectSpaces:
    row = RowContraction.row(T.T)
    DT = psd_sqrt(np.eye(row.shape[1]) - row.conj().T @ row)
    DTs = psd_sqrt(np.eye(row.shape[0]) - row @ row.conj().T)
    return DefectSpaces(DT, DTs, _range(DT, tol), _range(DTs, tol))


def _range(M: np.ndarray, tol: float) -> np.ndarray:
    w, V = np.linalg.eigh(M)
    return canonical_basis(V[:, w > tol])


def halmos_dilation(T: RowContraction, tol: float = 1e-10) -> Colligation:
    """Unitary colligation ``[[T^*, D_T], [D_{T^*}, -T]]`` on the defect spaces.

    ``A_j = T_j^*``, ``B = D_T`` restricted to the defect space of ``T``,
    ``C = D_{T^*}`` and ``D = -T`` compressed between the defect spaces.
    """
    ds = defect_spaces(T, tol)
    row = RowContraction.row(T.T)
    d, p = T.d, T.dim
    A = np.array([Tj.conj().T for Tj in T.T])
    B = (ds.DT @ ds.basis_T).reshape(d, p, -1)
    C = ds.basis_Tstar.conj().T @ ds.DTstar
    D = -ds.basis_Tstar.conj().T @ row @ ds.basis_T
    return Colligation(A, B, C, D)


class CharacteristicFunction:
    """``theta_T(lambda) = -T + D_{T^*} (I - Z(lambda) T^*)^{-1} Z(lambda) D_T``, compressed.

    Evaluated directly from the defect operators rather than through the
    dilation, so the two routes can be compared.
    """

    def __init__(self, T: RowContraction, tol: float = 1e-10):
        self.T = T
        self.spaces = defect_spaces(T, tol)
        self._row = RowContraction.row(T.T)

    def __call__(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=complex).reshape(-1)
        T, ds = self.T, self.spaces
        p = T.dim
        ZTstar = sum(z * Tj.conj().T for z, Tj in zip(lam, T.T))
        Zrow = np.kron(lam[None, :], np.eye(p))
        middle = np.linalg.solve(np.eye(p) - ZTstar, Zrow @ ds.DT)
        full = -self._row + ds.DTstar @ middle
        return ds.basis_Tstar.conj().T @ full @ ds.basis_T


def characteristic_function(T: RowContraction, tol: float = 1e-10) -> CharacteristicFunction:
    return CharacteristicFunction(T, tol)


@dataclass(frozen=True)
class PurityReport:
    pure: bool
    norm: float
    tol: float


def pure_check(S0, tol: float = 1e-8) -> PurityReport:
    """``S(0)`` is a strict contraction: ``||S(0)|| <= 1 - tol``."""
    S0 = np.atleast_2d(np.asarray(S0, dtype=complex))
    n = spectral_norm(S0)
    return PurityReport(bool(n <= 1 - tol), n, tol)


@dataclass(frozen=True)
class CoincidenceReport:
    """Conditions under which a colligation is a Halmos dilation up to unitaries.

    ``coincides`` requires a unitary colligation with commuting ``A`` and pure
    transfer function.  The three equivalent forms of purity for unitary
    ``U`` (``B`` injective, ``C^*`` injective, ``||D|| < 1``) are reported
    separately with matched thresholds.
    """

    coincides: bool
    unitary: bool
    commutative: bool
    pure: bool
    B_injective: bool
    Cstar_injective: bool
    D_strict: bool
    trio_consistent: bool
    tol: float


def _smin(M: np.ndarray) -> float:
    if M.shape[1] == 0:
        return np.inf
    if M.shape[0] < M.shape[1]:
        return 0.0
    return float(np.linalg.svd(M, compute_uv=False)[-1])


def coincidence_conditions(col: Colligation, tol: float = 1e-8,
                           structure_tol: float = 1e-10) -> CoincidenceReport:
    """Check whether ``col`` is unitarily a Halmos dilation of a commuting row contraction.

    For unitary ``U`` one has ``sigma_min(B)^2 = 1 - ||D||^2`` and likewise for
    ``C^*``, so the injectivity thresholds are set to ``sqrt(1 - (1 - tol)^2)``
    to make the three purity tests agree exactly.
    """
    rep = structure_report(col, structure_tol)
    commutative = commutator_residual(col.A) <= structure_tol
    purity = pure_check(col.D, tol)
    inj = np.sqrt(1 - (1 - tol) ** 2)
    b_inj = bool(_smin(col.B.reshape(col.d * col.dim_state, col.dim_input)) > inj)
    c_inj = bool(_smin(col.C.conj().T) > inj)
    trio = bool(b_inj == c_inj == purity.pure) if rep.unitary else True
    return CoincidenceReport(
        coincides=rep.unitary and commutative and purity.pure,
        unitary=rep.unitary,
        commutative=commutative,
        pure=purity.pure,
        B_injective=b_inj,
        Cstar_injective=c_inj,
        D_strict=purity.pure,
        trio_consistent=trio,
        tol=tol,
    )
