import math

import numpy as np
import pytest
from scipy.linalg import LinAlgError

from regreedy.kernels import KernelSpec, kernel_matrix
from regreedy.linalg import IncrementalCholesky, NotPositiveDefinite, chol_append, solve_regularized, tri_solve


def test_append_to_empty():
    ch = chol_append(IncrementalCholesky(0.1), [], 1.1)
    np.testing.assert_allclose(ch.L, [[math.sqrt(1.1)]], rtol=1e-15)


def test_append_second_point_hand_computed():
    e = math.exp(-1.0)
    ch = IncrementalCholesky()
    ch.append([], 1.0)
    ch.append([e], 1.0)
    # 2x2 Cholesky of [[1, e], [e, 1]]
    assert ch.L[1, 0] == pytest.approx(e, rel=1e-15)
    assert ch.L[1, 1] == pytest.approx(math.sqrt(1 - math.exp(-2.0)), rel=1e-15)
    assert ch.L[1, 1] == pytest.approx(0.9298735, abs=1e-7)


def test_duplicate_point_is_not_positive_definite():
    ch = IncrementalCholesky(0.0)
    ch.append([], 1.0)
    with pytest.raises(NotPositiveDefinite):
        ch.append([1.0], 1.0)
    assert ch.n == 1


def test_wrong_row_length():
    ch = IncrementalCholesky()
    with pytest.raises(ValueError):
        ch.append([1.0], 1.0)


@pytest.mark.parametrize("family", ["gaussian", "imq", "wendland"])
def test_incremental_matches_batch(family, rng):
    spec = KernelSpec(family, 2.0, 2, 1e-6)
    X = rng.uniform(-1, 1, (40, 2))
    M = kernel_matrix(spec, X, regularized=True)
    ch = IncrementalCholesky(spec.lam, capacity=1)  # forces several capacity doublings
    for k in range(len(X)):
        ch.append(M[k, :k], M[k, k])
        batch = np.linalg.cholesky(M[: k + 1, : k + 1])
        np.testing.assert_allclose(ch.L, batch, atol=1e-10, rtol=0)
        assert np.all(np.diag(ch.L) > 0)
    np.testing.assert_allclose(ch.L @ ch.L.T, M, atol=1e-10 * np.abs(M).max())


def test_never_fails_for_positive_lambda(rng):
    for trial in range(20):
        spec = KernelSpec(["gaussian", "imq", "wendland"][trial % 3], float(rng.uniform(0.1, 1.0)), 2, 1e-3)
        X = rng.uniform(-1, 1, (30, 2))
        M = kernel_matrix(spec, X, regularized=True)
        ch = IncrementalCholesky(spec.lam, pivot_tol=1e-14 * spec.phi0)
        for k in range(len(X)):
            ch.append(M[k, :k], M[k, k])


def test_solve_regularized_small():
    spec = KernelSpec("gaussian", 1.0, 1, 1.0)
    np.testing.assert_allclose(solve_regularized(spec, [[0.3]], [2.0]), [1.0])
    np.testing.assert_array_equal(solve_regularized(KernelSpec("imq", 2.0, 1, 0.0), [[0.3]], [0.0]), [0.0])


def test_solve_regularized_against_inverse(rng):
    spec = KernelSpec("gaussian", 3.0, 1, 1e-4)
    X = rng.uniform(0, 1, (10, 1))
    b = rng.standard_normal(10)
    M = kernel_matrix(spec, X, regularized=True)
    alpha = solve_regularized(spec, X, b)
    np.testing.assert_allclose(alpha, np.linalg.inv(M) @ b, rtol=1e-8)
    assert np.max(np.abs(M @ alpha - b)) <= 1e-9 * np.max(np.abs(b))


def test_ridge_shrinkage(rng):
    X = rng.uniform(0, 1, (15, 2))
    b = rng.standard_normal(15)
    norms = [np.linalg.norm(solve_regularized(KernelSpec("imq", 2.0, 2, lam), X, b)) for lam in np.logspace(-6, 1, 15)]
    assert all(b <= a for a, b in zip(norms, norms[1:]))


def test_tri_solve():
    b = np.array([3.0, -1.0, 2.0])
    np.testing.assert_array_equal(tri_solve(np.eye(3), b), b)
    np.testing.assert_allclose(tri_solve([[2.0, 0.0], [1.0, 1.0]], [2.0, 2.0]), [1.0, 1.0])
    with pytest.raises(LinAlgError):
        tri_solve([[1.0, 0.0], [1.0, 0.0]], [1.0, 1.0])


def test_tri_solve_multiply_back(rng):
    L = np.tril(rng.standard_normal((12, 12))) + 5 * np.eye(12)
    b = rng.standard_normal(12)
    np.testing.assert_allclose(L @ tri_solve(L, b), b, atol=1e-12)
    np.testing.assert_allclose(L.T @ tri_solve(L, b, transposed=True), b, atol=1e-12)
