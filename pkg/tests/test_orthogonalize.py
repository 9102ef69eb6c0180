import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mlsorth.basis import SelectionConfig, select_basis
from mlsorth.mindex import monomial_eval
from mlsorth.orthogonalize import (
    NonPositivePivotError,
    build_orthonormal_basis,
    format_coefficients_csv,
    gram_matrix,
    inner,
    ldl_decompose,
    orthonormal_coefficients,
)
from mlsorth.pointset import make_pointset


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 10))
def test_ldl_matches_cholesky(seed, n):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n))
    m = a @ a.T + n * np.eye(n)
    s, d = ldl_decompose(m)
    np.testing.assert_allclose(np.diag(s), 1.0)
    np.testing.assert_allclose(np.triu(s, 1), 0.0)
    np.testing.assert_allclose(s * np.sqrt(d), np.linalg.cholesky(m), rtol=1e-10, atol=1e-12)


def test_ldl_rejects_indefinite():
    with pytest.raises(NonPositivePivotError) as exc:
        ldl_decompose([[1.0, 2.0], [2.0, 1.0]])
    assert exc.value.index == 1 and exc.value.pivot < 0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(4, 40), st.sampled_from([2, 3]),
       st.integers(1, 4))
def test_orthonormal_on_random_weighted_points(seed, n, d, k):
    rng = np.random.default_rng(seed)
    ps = make_pointset(rng.uniform(-1, 1, (n, d)) * 10 ** rng.uniform(-3, 3),
                       rng.uniform(0.1, 3.0, n))
    ob = build_orthonormal_basis(ps, SelectionConfig.order(k), center=ps.points[0])
    g = ob.gram()
    assert np.max(np.abs(g - np.eye(ob.n))) <= 1e-10
    assert np.allclose(np.triu(ob.coeffs, 1), 0.0)
    assert np.all(np.diag(ob.coeffs) > 0)


def test_gram_matrix_symmetric_and_positive(grid9):
    b = select_basis(grid9)
    m = gram_matrix(grid9, b)
    np.testing.assert_array_equal(m, m.T)
    assert np.all(np.linalg.eigvalsh(m) > 0)


def test_inner():
    ps = make_pointset([[0.0], [1.0]], [2.0, 3.0])
    assert inner(ps, [1, 2], [3, 4]) == 2 * 3 + 3 * 8


def test_binding_checked(grid9, circle6):
    b = select_basis(grid9)
    with pytest.raises(ValueError, match="different point set"):
        gram_matrix(circle6, b)


@pytest.mark.parametrize("refine", [True, False])
def test_unrefined_also_orthonormal_on_easy_sets(grid9, refine):
    b = select_basis(grid9)
    s, d = ldl_decompose(gram_matrix(grid9, b))
    ob = orthonormal_coefficients(s, d, grid9, b, refine=refine)
    np.testing.assert_allclose(ob.gram(), np.eye(9), atol=1e-12)


def test_expand_matches_evaluation(rng):
    ps = make_pointset(rng.uniform(2, 3, (10, 2)))
    ob = build_orthonormal_basis(ps, center=[2.5, 2.5])
    x = np.array([2.2, 2.9])
    direct = ob(x)
    for i, poly in enumerate(ob.expand()):
        val = sum(c * monomial_eval(x, a) for a, c in poly.items())
        assert val == pytest.approx(direct[i], rel=1e-8, abs=1e-8)


def test_derivative_matches_finite_difference(rng):
    ps = make_pointset(rng.uniform(-1, 1, (15, 2)) * 0.1)
    ob = build_orthonormal_basis(ps, SelectionConfig.order(3), center=[0.01, 0.0])
    x, h = np.array([0.02, -0.01]), 1e-5
    fd = (ob(x + [h, 0]) - ob(x - [h, 0])) / (2 * h)
    np.testing.assert_allclose(ob.derivative(x, (1, 0)), fd, rtol=1e-5, atol=1e-4)


def test_coefficients_csv(circle6):
    text = format_coefficients_csv(build_orthonormal_basis(circle6))
    lines = text.splitlines()
    assert lines[0].startswith("# frame center=")
    assert lines[1] == "poly,0:0,1:0,0:1,2:0,1:1,3:0"
    assert len(lines) == 8


def test_gram_examples(grid9, circle6):
    from mlsorth.basis import basis_from_monomials

    assert gram_matrix(grid9, basis_from_monomials(grid9, [(0, 0)])).tolist() == [[9.0]]
    from mlsorth.pointset import ScaleFrame

    m = gram_matrix(circle6, basis_from_monomials(circle6, [(0, 0), (1, 0)],
                                                  frame=ScaleFrame.identity(2)))
    np.testing.assert_allclose(m, [[6, 0], [0, 3]], atol=1e-12)
    s, d = ldl_decompose(m)
    np.testing.assert_allclose(s, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(d, [6, 3])
    one = make_pointset([[0.0, 0.0]])
    assert gram_matrix(one, basis_from_monomials(one, [(0, 0)])).tolist() == [[1.0]]


def test_ldl_examples():
    s, d = ldl_decompose(np.eye(3))
    np.testing.assert_array_equal(s, np.eye(3))
    np.testing.assert_array_equal(d, np.ones(3))
    s, d = ldl_decompose([[4.0, 2.0], [2.0, 3.0]])
    np.testing.assert_allclose(s, [[1, 0], [0.5, 1]])
    np.testing.assert_allclose(d, [4, 2])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 12))
def test_ldl_reconstructs(seed, n):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n))
    m = a @ a.T + 0.1 * np.eye(n)
    s, d = ldl_decompose(m)
    assert np.max(np.abs(s @ np.diag(d) @ s.T - m)) <= 1e-12 * np.max(np.abs(m))


def test_single_weighted_point():
    ob = build_orthonormal_basis(make_pointset([[0.3, 0.1]], [4.0]), center=[0.3, 0.1])
    assert ob.coeffs.tolist() == [[0.5]]


def test_random_disc_order2(rng):
    from mlsorth.harness import sample_disc

    ob = build_orthonormal_basis(sample_disc(rng, 128), SelectionConfig.order(2))
    assert ob.n == 6
    assert np.max(np.abs(ob.gram() - np.eye(6))) <= 1e-10


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(6, 40), st.integers(1, 4))
def test_span_equivalence(seed, n, k):
    rng = np.random.default_rng(seed)
    ps = make_pointset(rng.uniform(-1, 1, (n, 2)), rng.uniform(0.5, 2, n))
    ob = build_orthonormal_basis(ps, SelectionConfig.order(k))
    from mlsorth.mindex import monomial_matrix

    x = monomial_matrix(ob.frame.to_local(ps.points), ob.accepted)
    v = ob.node_values()
    proj = (x * ps.weights) @ v.T  # <x^a, P_i>
    np.testing.assert_allclose(proj @ v, x, atol=1e-10 * max(1.0, np.max(np.abs(x))))
