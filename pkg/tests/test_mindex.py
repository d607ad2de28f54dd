import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from drealize import catalog, mindex
from drealize.errors import DegreeTooLargeError, InputError
from drealize.mindex import TruncatedSeries, monomial


def scalar_monomial(n, cap=4, c=1.0):
    return monomial(len(n), cap, n, [[c]])


def test_weight_examples():
    assert mindex.weight((0, 0)) == 1
    assert mindex.weight((1, 1)) == 2
    assert mindex.weight((2, 1)) == 3
    assert mindex.weight((3, 2, 1)) == 60


def test_weight_is_exact_and_overflow_is_reported():
    assert mindex.weight((100, 100)) == math.comb(200, 100)
    with pytest.raises(DegreeTooLargeError):
        mindex.weight((600, 600))


def test_negative_index_rejected():
    with pytest.raises(InputError):
        mindex.weight((1, -1))


@given(st.lists(st.integers(0, 12), min_size=1, max_size=4), st.randoms())
def test_weight_symmetric(n, rnd):
    perm = list(n)
    rnd.shuffle(perm)
    assert mindex.weight(tuple(n)) == mindex.weight(tuple(perm))


def test_grlex_order():
    assert mindex.indices_of_degree(2, 2) == ((2, 0), (1, 1), (0, 2))
    assert mindex.indices_up_to(2, 1) == ((0, 0), (1, 0), (0, 1))
    assert len(mindex.indices_up_to(3, 4)) == math.comb(7, 3)


def test_arveson_inner_examples():
    l1l2 = scalar_monomial((1, 1))
    assert mindex.arveson_inner(l1l2, l1l2) == pytest.approx(0.5)
    l1sq = scalar_monomial((2, 0))
    assert mindex.arveson_inner(l1sq, l1sq) == pytest.approx(1.0)
    assert mindex.arveson_inner(scalar_monomial((1, 0)), scalar_monomial((0, 1))) == 0


def test_series_mul_examples():
    b = scalar_monomial((1, 2), cap=3, c=2.0) + scalar_monomial((3, 0), cap=3)
    prod = mindex.series_mul(mindex.identity(2, 3, 1), b, 2)
    assert prod.cap == 2 and not np.any(prod[(1, 2)]) and not np.any(prod[(3, 0)])
    prod = mindex.series_mul(scalar_monomial((1, 0)), scalar_monomial((0, 1)), 4)
    assert prod[(1, 1)][0, 0] == 1
    B = catalog.quadratic_colligation().B
    rows = np.eye(6).reshape(2, 3, 6)
    Z = mindex.linear_pencil(rows, 3)
    out = mindex.series_mul(Z, mindex.constant(2, 3, np.vstack(B)), 3)
    assert np.allclose(out[(1, 0)], B[0]) and np.allclose(out[(0, 1)], B[1])
    assert set(out.coeffs) <= {(1, 0), (0, 1)}


def test_neumann_inverse_examples():
    Iser = mindex.identity(2, 5, 3)
    assert np.allclose(mindex.neumann_inverse(Iser, 5)[(0, 0)], np.eye(3))
    a = mindex.constant(1, 6, [[1.0]]) - mindex.monomial(1, 6, (1,), [[0.5]])
    inv = mindex.neumann_inverse(a, 6)
    assert [inv[(k,)][0, 0].real for k in range(7)] == [0.5**k for k in range(7)]


def test_neumann_inverse_rejects_bad_constant():
    with pytest.raises(InputError):
        mindex.neumann_inverse(mindex.constant(2, 3, [[2.0]]), 3)


def test_neumann_inverse_is_inverse():
    rng = np.random.default_rng(1)
    mats = 0.4 * rng.standard_normal((3, 4, 4))
    a = mindex.identity(3, 6, 4) - mindex.linear_pencil(mats, 6)
    inv = mindex.neumann_inverse(a, 6)
    prod = mindex.series_mul(a, inv, 6)
    for n in mindex.indices_up_to(3, 6):
        target = np.eye(4) if sum(n) == 0 else 0
        assert np.max(np.abs(prod[n] - target)) <= 1e-13


def test_backward_shift_examples():
    out = mindex.backward_shift(scalar_monomial((1, 1)), 0)
    assert out[(0, 1)][0, 0] == pytest.approx(0.5)
    assert not any(np.any(c) for _, c in mindex.backward_shift(mindex.constant(2, 3, [[1.0]]), 0).items())
    out = mindex.backward_shift(scalar_monomial((2, 0)), 0)
    assert out[(1, 0)][0, 0] == pytest.approx(1.0)


def test_backward_shift_cap_drops_by_one():
    assert mindex.backward_shift(scalar_monomial((1, 1), cap=4), 1).cap == 3


def test_truncated_series_validation():
    with pytest.raises(InputError):
        TruncatedSeries.build(2, 1, (1, 1), {(1, 1): [[1.0]]})
    with pytest.raises(InputError):
        TruncatedSeries.build(2, 2, (1, 1), {(1,): [[1.0]]})


def test_evaluate_matches_formula():
    f = scalar_monomial((2, 1), c=3.0) + scalar_monomial((0, 0), c=-1.0)
    lam = np.array([0.3 + 0.1j, -0.2j])
    assert f.evaluate(lam)[0, 0] == pytest.approx(3 * lam[0] ** 2 * lam[1] - 1)


coef = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)


@st.composite
def polynomials(draw, d=2, cap=4, dim=2):
    basis = mindex.indices_up_to(d, cap)
    coeffs = {n: np.array(draw(st.lists(coef, min_size=dim, max_size=dim))).reshape(dim, 1)
              for n in draw(st.lists(st.sampled_from(basis), max_size=6, unique=True))}
    return TruncatedSeries.build(d, cap, (dim, 1), coeffs)


@settings(max_examples=60, deadline=None)
@given(polynomials(), polynomials(), st.integers(0, 1))
def test_backward_shift_adjointness(f, g, j):
    g = TruncatedSeries.build(2, 4, g.shape, {n: c for n, c in g.items() if sum(n) <= 3})
    lam_g = mindex.series_mul(monomial(2, 4, mindex.unit(2, j), np.eye(2)), g, 4)
    lhs = mindex.arveson_inner(mindex.backward_shift(f, j), g)
    rhs = mindex.arveson_inner(f, lam_g)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, mindex.arveson_norm(f) * mindex.arveson_norm(g))


@settings(max_examples=60, deadline=None)
@given(polynomials(), st.tuples(st.floats(-0.6, 0.6), st.floats(-0.6, 0.6)))
def test_gleason_identity(f, point):
    lam = np.array(point, dtype=complex)
    lhs = f.evaluate(lam) - f.evaluate(np.zeros(2))
    rhs = sum(lam[j] * mindex.backward_shift(f, j).evaluate(lam) for j in range(2))
    assert np.allclose(lhs, rhs, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(polynomials(), polynomials())
def test_arveson_inner_conjugate_symmetric(f, g):
    assert mindex.arveson_inner(f, g) == pytest.approx(np.conj(mindex.arveson_inner(g, f)))


@settings(max_examples=40, deadline=None)
@given(polynomials())
def test_monomial_basis_is_isometric(f):
    basis = mindex.MonomialBasis(2, 4, 2)
    v = basis.coords(f)
    assert np.vdot(v, v).real == pytest.approx(mindex.arveson_norm(f) ** 2, abs=1e-12)
    back = basis.series(v)
    assert all(np.allclose(back[n], f[n]) for n in basis.indices)


def test_shift_adjoint_matrix_matches_backward_shift():
    rng = np.random.default_rng(0)
    basis = mindex.MonomialBasis(2, 4, 1)
    v = rng.standard_normal(basis.size)
    f = basis.series(v)
    for j in range(2):
        g = mindex.backward_shift(f, j)
        assert np.allclose(basis.series(basis.shift_adjoint_matrix(j) @ v).truncate(3)[(1, 1)], g[(1, 1)])
        assert np.allclose(basis.coords(g.truncate(3)).ravel()[:10],
                           (basis.shift_adjoint_matrix(j) @ v)[:10])
