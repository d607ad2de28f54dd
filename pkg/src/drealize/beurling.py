"""Inner multipliers from interpolation data.

Interpolation conditions at points of the ball define a shift-invariant
subspace as the common kernel of finitely many functionals.  Those
functionals are encoded as a commuting output pair ``(C, A)``; completing
``[A; C]`` to a coisometry then yields an inner function whose range is the
subspace.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

import numpy as np

from . import mindex
from ._linalg import hermitian_part, psd_factor
from .colligation import Colligation, OutputPair, StructureReport, structure_report, taylor
from .errors import HypothesisError, InputError, NotContractiveError
from .kernels import d_subspace, weakly_coisometric_check
from .observability import (
    _annihilate,
    renormalize_exactly_observable,
    resolvent_series,
    strong_stability,
)

VARIANTS = ("points", "jet_chain", "lower_inclusive")


@dataclass(frozen=True, eq=False)
class InterpolationSpec:
    """Interpolation data in ``d`` variables with ``C^r``-valued functions.

    ``points``
        distinct nodes ``omega_i`` with row functionals ``x_i``: ``x_i f(omega_i) = 0``.
    ``jet_chain``
        one node ``omega`` and functionals ``x_0 .. x_{n-1}``.
    ``lower_inclusive``
        one node, a lower-inclusive index set ``E`` and a functional per index.

    ``omegas`` is ``(n, d)`` (a single row for the one-node variants) and
    ``functionals`` is ``(n, r)``.
    """

    variant: str
    d: int
    omegas: np.ndarray
    functionals: np.ndarray
    indices: tuple[mindex.MultiIndex, ...] | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InputError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        om = np.atleast_2d(np.asarray(self.omegas, dtype=complex))
        fx = np.atleast_2d(np.asarray(self.functionals, dtype=complex))
        if om.shape[1] != self.d:
            raise InputError(f"nodes have {om.shape[1]} coordinates, expected {self.d}")
        if np.any(np.linalg.norm(om, axis=1) >= 1):
            raise InputError("interpolation nodes must lie in the open unit ball")
        if self.variant == "points":
            if om.shape[0] != fx.shape[0]:
                raise InputError("need one functional per node")
        elif om.shape[0] != 1:
            raise InputError(f"variant {self.variant} takes a single node")
        if self.variant == "lower_inclusive":
            if self.indices is None or len(self.indices) != fx.shape[0]:
                raise InputError("need one functional per index")
            idx = tuple(mindex.check_index(n, self.d) for n in self.indices)
            idx_set = set(idx)
            if len(idx_set) != len(idx):
                raise InputError("index set has repeated entries")
            for n in idx:
                for j in range(self.d):
                    if n[j] and tuple(x - 1 if i == j else x for i, x in enumerate(n)) not in idx_set:
                        raise InputError(f"index set is not lower inclusive at {n}")
            order = sorted(range(len(idx)), key=lambda k: mindex.grlex_key(idx[k]))
            object.__setattr__(self, "indices", tuple(idx[k] for k in order))
            fx = fx[order]
        object.__setattr__(self, "omegas", om)
        object.__setattr__(self, "functionals", fx)

    @property
    def dim_output(self) -> int:
        return self.functionals.shape[1]

    @property
    def size(self) -> int:
        return self.functionals.shape[0]


def build_pair(spec: InterpolationSpec) -> OutputPair:
    """Encode the conditions as a commuting, strongly stable output pair.

    ``A_j^*`` is diagonal in ``omega_j`` (``points``), ``omega_j`` plus the
    lower shift (``jet_chain``), or ``omega_j`` plus the shift ``n -> n + e_j``
    on the index set (``lower_inclusive``).  ``C^*`` stacks the functionals.
    The annihilated subspace ``{f : sum_n A^{*n} C^* f_n = 0}`` is exactly the
    set of functions satisfying the conditions.
    """
    n, d = spec.size, spec.d
    Astar = np.zeros((d, n, n), dtype=complex)
    if spec.variant == "points":
        for j in range(d):
            Astar[j] = np.diag(spec.omegas[:, j])
    elif spec.variant == "jet_chain":
        shift = np.eye(n, k=-1)
        for j in range(d):
            Astar[j] = spec.omegas[0, j] * np.eye(n) + shift
    else:
        pos = {m: k for k, m in enumerate(spec.indices)}
        for j in range(d):
            Astar[j] = spec.omegas[0, j] * np.eye(n)
            for col, m in enumerate(spec.indices):
                up = tuple(x + 1 if i == j else x for i, x in enumerate(m))
                if up in pos:
                    Astar[j][pos[up], col] = 1.0
    A = np.array([M.conj().T for M in Astar])
    C = spec.functionals.conj().T
    pair = OutputPair(C, A)
    if pair.commutator_residual() > 1e-12:
        raise HypothesisError("interpolation pair is not commutative")
    return pair


def cholesky_complete(pair: OutputPair, tol: float = 1e-10) -> Colligation:
    """Complete ``[A; C]`` to a coisometry ``U = [[A, B], [C, D]]``.

    ``[B; D]`` is a rank-minimal factor of ``M = I - [A; C][A; C]^*``;
    eigenvalues at or below ``tol * max(1, ||M||)`` are dropped, so the number
    of inputs is the numerical rank of ``M``.

    Raises
    ------
    NotContractiveError
        If ``M`` has an eigenvalue below ``-tol``.
    """
    G = pair.stacked()
    M = np.eye(G.shape[0]) - G @ G.conj().T
    w = np.linalg.eigvalsh(hermitian_part(M))
    if w.size and w[0] < -tol * max(1.0, float(np.max(np.abs(w)))):
        raise NotContractiveError(
            f"[A; C] is not a contraction (I - GG^* has eigenvalue {w[0]:.3e})"
        )
    L = psd_factor(M, tol)
    return Colligation.from_blocks(G, L, pair.d, pair.dim_state)


@dataclass(frozen=True)
class Condition:
    name: str
    passed: bool
    residual: float
    threshold: float
    note: str = ""


@dataclass(frozen=True)
class InnerVerdict:
    """Per-condition certificate; ``inner`` is the conjunction of all of them."""

    inner: bool
    conditions: tuple[Condition, ...]

    def __getitem__(self, name: str) -> Condition:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)


def inner_certify(col: Colligation, tol: float = 1e-10, stability_tol: float = 1e-12,
                  max_iter: int = 5000, cross_check_degree: int | None = None) -> InnerVerdict:
    """Certify that the transfer function is inner.

    The sufficient conditions checked are: ``A`` commutative, strongly stable,
    ``(C, A)`` isometric and ``U`` weakly coisometric.  With
    ``cross_check_degree`` set and ``A`` nilpotent, the Taylor polynomial is
    also run through the partial-isometry test.
    """
    conds = []
    comm = col.pair.commutator_residual()
    conds.append(Condition("commutative", comm <= tol, comm, tol))
    stab = strong_stability(col.A, stability_tol, max_iter)
    note = "inconclusive" if stab.inconclusive else ""
    conds.append(Condition("strongly_stable", stab.stable, stab.decay[-1], stability_tol, note))
    iso = col.pair.isometric_residual()
    conds.append(Condition("isometric_pair", iso <= tol, iso, tol))
    dsub = d_subspace(col.pair)
    wc = weakly_coisometric_check(col, dsub, tol)
    note = "D subspace inconclusive" if dsub.inconclusive else ""
    conds.append(Condition("weakly_coisometric", wc.passed and not dsub.inconclusive, wc.defect, tol, note))
    if cross_check_degree is not None and stab.stable and stab.decay[-1] == 0.0:
        from .model import partial_isometry_test

        S = taylor(col, stab.steps + 1).truncate(stab.steps + 1)
        pit = partial_isometry_test(S, cross_check_degree, tol)
        conds.append(Condition("partial_isometry", pit.passed, pit.defect, tol))
    return InnerVerdict(all(c.passed for c in conds), tuple(conds))


@dataclass(frozen=True, eq=False)
class RepresenterResult:
    """Output of :func:`representer_pipeline` with its certificates."""

    colligation: Colligation
    pair: OutputPair
    original_pair: OutputPair
    renormalized: bool
    verdict: InnerVerdict
    structure: StructureReport
    membership_residual: float
    series_tail: float
    notes: tuple[str, ...] = field(default_factory=tuple)

    def S(self, lam) -> np.ndarray:
        return self.colligation.transfer(lam)

    @property
    def certified(self) -> bool:
        return self.verdict.inner and self.structure.coisometric


def membership_residual(pair: OutputPair, col: Colligation, check_cap: int = 2,
                        series_cap: int = 30) -> tuple[float, float]:
    """Largest ``||sum_n A^{*n} C^* (S lambda^m u)_n||`` over ``|m| <= check_cap``.

    ``S`` is expanded through ``series_cap``; the second return value is the
    largest coefficient norm at that degree, a proxy for the truncation error.
    """
    T = taylor(col, series_cap)
    tail = T.degree_norm(series_cap)
    R = resolvent_series(pair, series_cap)
    worst = 0.0
    d, q = col.d, col.dim_input
    columns = [T.right(np.eye(q)[:, [u]]) for u in range(q)]
    for m in mindex.indices_up_to(d, check_cap):
        shift = mindex.monomial(d, series_cap, m, np.eye(col.dim_output))
        for col_u in columns:
            f = mindex.series_mul(shift, col_u, series_cap)
            worst = max(worst, float(np.linalg.norm(_annihilate(pair, R, f))))
    return worst, tail


def representer_pipeline(spec, tol: float = 1e-10, renormalize: bool = True,
                         check_cap: int = 2, series_cap: int = 30) -> RepresenterResult:
    """Inner multiplier ``S`` with ``Ran M_S`` equal to the annihilated subspace.

    ``spec`` is an :class:`InterpolationSpec` or an :class:`OutputPair`.
    Non-isometric pairs are renormalized by the square root of their gramian
    unless ``renormalize`` is false.
    """
    original = build_pair(spec) if isinstance(spec, InterpolationSpec) else spec
    pair = original
    renormalized = False
    if pair.isometric_residual() > tol:
        if not renormalize:
            raise HypothesisError(
                f"pair is not isometric (residual {pair.isometric_residual():.3e}); "
                "enable renormalization"
            )
        pair = renormalize_exactly_observable(pair)
        renormalized = True
    col = cholesky_complete(pair, tol)
    verdict = inner_certify(col, tol)
    memb, tail = membership_residual(original, col, check_cap, series_cap)
    notes = []
    if tail > tol:
        notes.append(f"series not negligible at degree {series_cap} ({tail:.2e})")
    return RepresenterResult(col, pair, original, renormalized, verdict,
                             structure_report(col, tol), memb, tail, tuple(notes))


def blaschke(a) -> Colligation:
    """Unitary colligation of the ball automorphism vanishing at ``a``.

    ``U = [[a^*, (I_d - a^*a)^{1/2}], [(1 - |a|^2)^{1/2}, -a]]`` with state space
    ``C``, input ``C^d`` and output ``C``.
    """
    a = np.asarray(a, dtype=complex).reshape(1, -1)
    d = a.shape[1]
    na2 = float(np.vdot(a, a).real)
    if na2 >= 1:
        raise InputError("the zero of a ball automorphism must lie in the open ball")
    s = np.sqrt(1 - na2)
    P = a.conj().T @ a
    # (I - a^*a)^{1/2} = I + (s - 1)/|a|^2 a^*a, exact since a^*a/|a|^2 is a projection
    root = np.eye(d) + ((s - 1) / na2 if na2 > 0 else 0.0) * P
    A = a.conj().T.reshape(d, 1, 1)
    B = root.reshape(d, 1, d)
    return Colligation(A, B, np.array([[s]]), -a)


def _hankel(n: int) -> list[list[Fraction]]:
    s = [Fraction(k + 1, 2 * k + 1) for k in range(2 * n + 1)]
    return [[s[i + j] for j in range(n + 1)] for i in range(n + 1)]


def bareiss_rank(rows: list[list[int]]) -> int:
    """Rank of an integer matrix by fraction-free Gaussian elimination."""
    M = [list(r) for r in rows]
    nrows = len(M)
    ncols = len(M[0]) if M else 0
    rank = 0
    prev = 1
    for c in range(ncols):
        piv = next((r for r in range(rank, nrows) if M[r][c] != 0), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        for r in range(rank + 1, nrows):
            for k in range(c + 1, ncols):
                M[r][k] = (M[r][k] * M[rank][c] - M[rank][k] * M[r][c]) // prev
            M[r][c] = 0
        prev = M[rank][c]
        rank += 1
        if rank == nrows:
            break
    return rank


def hankel_probe(n_max: int = 8, bound: int = 64) -> list[int]:
    """Exact ranks of the Hankel matrices ``H_n = [s_{i+j}]_{i,j<=n}``, ``s_k = (k+1)/(2k+1)``.

    By Kronecker's theorem a power series is rational exactly when its
    infinite Hankel matrix has finite rank, so full rank at every ``n`` is
    evidence against rationality.  Rows are cleared of denominators and
    ranked by fraction-free elimination.
    """
    if not 0 <= n_max <= bound:
        raise InputError(f"n_max must lie in 0..{bound}")
    ranks = []
    for n in range(n_max + 1):
        H = _hankel(n)
        ints = []
        for row in H:
            den = lcm(*(x.denominator for x in row))
            ints.append([int(x * den) for x in row])
        ranks.append(bareiss_rank(ints))
    return ranks
