import numpy as np
import pytest

from drealize import catalog, mindex
from drealize._linalg import random_ball_points, spectral_norm
from drealize.colligation import structure_report, taylor
from drealize.errors import CaptureError, InputError, NonInvariantError, NotContractiveError
from drealize.kernels import kernel_KCA, kernel_KS, weakly_coisometric_check
from drealize.model import (
    assemble,
    gleason_model_pair,
    hks_subspace,
    model_family,
    multiplier_gram,
    partial_isometry_test,
    representer_family,
    span_of,
)

from _families import random_unitary

Z_ROW = mindex.TruncatedSeries.build(2, 1, (1, 2), {(1, 0): [[1, 0]], (0, 1): [[0, 1]]})
ISO_COLUMN = mindex.constant(2, 0, [[0.6], [0.8j]])


def family_for(S, N=None):
    N = 2 * S.degree + 2 if N is None else N
    space = hks_subspace(S, N)
    pair, _ = gleason_model_pair(space)
    return space, pair, model_family(S, space, pair)


def test_multiplier_gram_examples():
    G = multiplier_gram(ISO_COLUMN, 3)
    assert np.allclose(G, np.eye(G.shape[0]))
    assert multiplier_gram(Z_ROW, 2)[0, 0] == pytest.approx(1.0)
    assert multiplier_gram(catalog.quadratic_multiplier(), 2)[0, 0] == pytest.approx(1.0)


def test_multiplier_gram_matches_arveson_inner():
    S = catalog.balanced_multiplier()
    G = multiplier_gram(S, 1)
    S3 = mindex.TruncatedSeries.build(2, 3, S.shape, dict(S.items()))
    # input coordinate varies fastest: columns 5 and 7 are lambda_1 e_1, lambda_1 e_3
    f = mindex.series_mul(S3, mindex.monomial(2, 3, (1, 0), np.eye(4)[:, 1:2]), 3)
    g = mindex.series_mul(S3, mindex.monomial(2, 3, (1, 0), np.eye(4)[:, 3:4]), 3)
    assert G[5, 5] == pytest.approx(mindex.arveson_inner(f, f).real)
    assert G[7, 5] == pytest.approx(mindex.arveson_inner(f, g))
    assert G[7, 5] == pytest.approx(1 / 3)


def test_partial_isometry_examples():
    rep = partial_isometry_test(catalog.quadratic_multiplier(), 4)
    assert rep.passed and rep.defect <= 1e-10
    assert partial_isometry_test(Z_ROW, 4).passed
    rep = partial_isometry_test(mindex.constant(2, 0, [[0.5]]), 2)
    assert not rep.passed and rep.defect == pytest.approx(0.1875)


def test_twisted_multiplier_is_not_inner():
    S = taylor(catalog.twisted_colligation(), 2)
    assert not partial_isometry_test(S, 3).passed


def test_hks_subspace_examples():
    basis_funcs = lambda space: [np.round(space.values(lam), 12) for lam in ([0, 0], [1, 0], [0, 1])]
    quad = hks_subspace(catalog.quadratic_multiplier(), 6)
    assert quad.dim == 3
    bal = hks_subspace(catalog.balanced_multiplier(), 6)
    assert bal.dim == 3
    for a, b in zip(basis_funcs(quad), basis_funcs(bal)):
        assert np.allclose(a, b)
    # basis is 1, lambda_1, lambda_2
    assert np.allclose(quad.values([0.3, 0.2]), [[1, 0.3, 0.2]])
    one = hks_subspace(Z_ROW, 4)
    assert one.dim == 1 and np.allclose(one.values([0.3, 0.1]), [[1]])


def test_hks_subspace_capture_failure():
    with pytest.raises(CaptureError, match="raise N"):
        hks_subspace(catalog.quadratic_multiplier(), 2)
    with pytest.raises(InputError):
        hks_subspace(catalog.quadratic_multiplier(), 1)


def test_hks_basis_is_isometric_and_reproducing():
    space = hks_subspace(catalog.quadratic_multiplier(), 6)
    assert np.allclose(space.Q.conj().T @ space.Q, np.eye(space.dim), atol=1e-12)
    els = space.elements()
    gram = np.array([[mindex.arveson_inner(f, g) for g in els] for f in els])
    assert np.allclose(gram, np.eye(3), atol=1e-12)
    rng = np.random.default_rng(0)
    pts = random_ball_points(6, 2, 0.7, rng)
    for lam in pts:
        for zeta in pts:
            assert np.allclose(space.kernel(lam, zeta), kernel_KS(catalog.quadratic_S, lam, zeta))


def test_gleason_pair_quadratic():
    space = hks_subspace(catalog.quadratic_multiplier(), 6)
    pair, rep = gleason_model_pair(space)
    target = catalog.quadratic_colligation()
    assert rep.invariant and rep.contractive_gap >= -1e-12
    assert np.allclose(pair.A, target.A, atol=1e-12) and np.allclose(pair.C, target.C, atol=1e-12)


def test_gleason_pair_constant_space():
    pair, _ = gleason_model_pair(hks_subspace(Z_ROW, 4))
    assert np.allclose(pair.A, 0) and np.allclose(pair.C, [[1]])


def test_gleason_detects_non_invariance():
    space = span_of(catalog.rational_generators(12))
    with pytest.raises(NonInvariantError) as info:
        gleason_model_pair(space)
    k, axis, res = info.value.report.worst
    assert 0 <= k < space.dim and axis in (0, 1) and res > 1e-3
    assert f"basis vector {k}" in str(info.value)


def test_model_family_quadratic_is_unique():
    _, _, fam = family_for(catalog.quadratic_multiplier())
    assert fam.kernel_basis.shape[1] == 0 and fam.unique
    col = assemble(fam)
    assert np.allclose(col.B, catalog.quadratic_colligation().B, atol=1e-12)
    assert np.allclose(col.D, 0)


def test_model_family_balanced():
    _, _, fam = family_for(catalog.balanced_multiplier())
    assert fam.parameter_shape == (1, 1)
    u0 = fam.kernel_basis[:, 0]
    assert np.allclose(u0, np.array([0, 1, 0, -1]) / np.sqrt(2), atol=1e-12)
    for alpha in (0, 0.5, 1j, 1, -1):
        col = assemble(fam, [[alpha]])
        assert np.allclose(col.B, catalog.balanced_B(np.conj(alpha)), atol=1e-12)
        assert weakly_coisometric_check(col, fam.dsub).passed
        rep = structure_report(col, 1e-12)
        assert rep.unitary == (abs(alpha) == 1)
        assert rep.coisometric == (abs(alpha) == 1)


def test_model_family_shift_row_is_unitary():
    _, _, fam = family_for(Z_ROW)
    assert fam.parameter_shape == (0, 0)
    assert structure_report(assemble(fam), 1e-12).unitary


def test_assemble_validates_parameter():
    _, _, fam = family_for(catalog.balanced_multiplier())
    with pytest.raises(NotContractiveError):
        assemble(fam, [[1.5]])
    with pytest.raises(InputError):
        assemble(fam, np.zeros((2, 1)))


@pytest.mark.parametrize("make", [catalog.quadratic_multiplier, catalog.balanced_multiplier])
def test_model_realization_properties(make):
    space, pair, fam = family_for(make())
    rng = np.random.default_rng(1)
    col = assemble(fam, None if fam.unique else [[0.3 - 0.4j]])
    # Gleason identity for each basis function
    for lam in random_ball_points(20, 2, 0.8, rng):
        F = space.values(lam)
        shifted = sum(lam[j] * F @ col.A[j] for j in range(2))
        assert np.allclose(F - space.values(np.zeros(2)), shifted, atol=1e-10)
    pts = random_ball_points(50, 2, 0.7, rng)
    S = lambda x: col.transfer(x)
    for lam, zeta in zip(pts, pts[::-1]):
        assert spectral_norm(kernel_KCA(col.pair, lam, zeta) - kernel_KS(S, lam, zeta)) <= 1e-9
        assert np.allclose(col.transfer(lam), make().evaluate(lam), atol=1e-12)
    # complement of D consists of h with sum_j lambda_j h_j(lambda) = 0
    k = space.dim
    for h in fam.complement.T:
        for lam in pts[:10]:
            val = sum(lam[j] * space.values(lam) @ h[j * k:(j + 1) * k] for j in range(2))
            assert np.allclose(val, 0, atol=1e-12)


def test_representer_family_constant_space():
    pair, _ = gleason_model_pair(hks_subspace(Z_ROW, 4))
    fam = representer_family(pair)
    assert fam.rank == 2
    col = fam.construct()
    for lam in random_ball_points(5, 2, 0.7, np.random.default_rng(2)):
        S = col.transfer(lam)
        assert np.allclose(S @ S.conj().T, lam @ lam.conj())


def test_representer_family_quadratic_kernel_and_unitary_freedom():
    space = hks_subspace(catalog.quadratic_multiplier(), 6)
    pair, _ = gleason_model_pair(space)
    fam = representer_family(pair)
    rng = np.random.default_rng(3)
    G1 = random_unitary(rng, fam.rank)
    G2 = random_unitary(rng, fam.rank)
    c1, c2 = fam.construct(G1), fam.construct(G2)
    assert partial_isometry_test(taylor(c1, 4).truncate(4), 3).passed
    for lam in random_ball_points(8, 2, 0.7, rng):
        for zeta in random_ball_points(2, 2, 0.7, rng):
            K = kernel_KS(c1.transfer, lam, zeta)
            assert np.allclose(K, catalog.quadratic_kernel(lam, zeta), atol=1e-10)
        # S_1 = S_2 (G_2 G_1^*)^* : a constant unitary factor on the right
        assert np.allclose(c1.transfer(lam), c2.transfer(lam) @ G2 @ G1.conj().T, atol=1e-12)


def test_representer_family_rejects_non_isometric():
    with pytest.raises(Exception, match="isometric"):
        representer_family(catalog.twisted_colligation().pair)
