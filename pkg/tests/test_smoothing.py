"""Forward and backward Gauss-Seidel sweeps."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import a_norm, random_spd, tridiag
from mgcycles import SparseMatrix, gs_backward, gs_forward


class TestForward:
    def test_hand_sweep(self):
        np.testing.assert_array_equal(gs_forward(tridiag(2), [1.0, 1.0]), [0.5, 0.75])

    def test_diagonal(self):
        A = SparseMatrix(np.diag([2.0, 4.0, 8.0]))
        np.testing.assert_array_equal(gs_forward(A, [1.0, 1.0, 1.0]), [0.5, 0.25, 0.125])

    def test_fixed_point(self, poisson8):
        x = np.arange(1.0, poisson8.n_rows + 1)
        y = gs_forward(poisson8, poisson8 @ x, x.copy())
        np.testing.assert_allclose(y, x, rtol=1e-14)

    def test_lower_triangular_solve(self):
        # from zero, one forward sweep is (D + L)^{-1} b
        rng = np.random.default_rng(3)
        A = random_spd(rng, 9)
        b = rng.standard_normal(9)
        np.testing.assert_allclose(gs_forward(SparseMatrix(A), b),
                                   np.linalg.solve(np.tril(A), b), atol=1e-12)

    def test_zero_diagonal(self):
        with pytest.raises(ValueError):
            gs_forward(SparseMatrix(np.array([[0.0, 1.0], [1.0, 2.0]])), [1.0, 1.0])


class TestBackward:
    def test_hand_sweep(self):
        # row 1 first: (1 + 0.5)/2 = 0.75, then row 0: (1 + 0.75)/2 = 0.875
        x = gs_backward(tridiag(2), [1.0, 1.0], np.array([0.5, 0.75]))
        np.testing.assert_array_equal(x, [0.875, 0.75])

    def test_upper_triangular_correction(self):
        # x + (D + U)^{-1} (b - A x), i.e. the M^T correction
        rng = np.random.default_rng(4)
        A = random_spd(rng, 9)
        b, x0 = rng.standard_normal(9), rng.standard_normal(9)
        expected = x0 + np.linalg.solve(np.triu(A), b - A @ x0)
        np.testing.assert_allclose(gs_backward(SparseMatrix(A), b, x0.copy()), expected,
                                   atol=1e-12)

    def test_diagonal_ignores_start(self):
        A = SparseMatrix(np.diag([2.0, 4.0]))
        np.testing.assert_array_equal(gs_backward(A, [1.0, 1.0], np.array([7.0, -3.0])),
                                      [0.5, 0.25])

    def test_fixed_point(self, poisson8):
        x = np.arange(1.0, poisson8.n_rows + 1)
        y = gs_backward(poisson8, poisson8 @ x, x.copy())
        np.testing.assert_allclose(y, x, rtol=1e-14)

    def test_zero_diagonal(self):
        with pytest.raises(ValueError):
            gs_backward(SparseMatrix(np.array([[1.0, 1.0], [1.0, 0.0]])), [1.0, 1.0])


@given(st.integers(2, 30), st.integers(0, 2**32 - 1))
def test_symmetric_sweep_decreases_energy_error(n, seed):
    rng = np.random.default_rng(seed)
    A = random_spd(rng, n)
    S = SparseMatrix(A)
    x_exact = rng.standard_normal(n)
    b = A @ x_exact
    x0 = rng.standard_normal(n)
    x = gs_backward(S, b, gs_forward(S, b, x0.copy()))
    before, after = a_norm(A, x_exact - x0), a_norm(A, x_exact - x)
    assert after < before * (1 + 1e-12)


def test_smoother_pair_is_symmetric():
    # x = M b followed by x += M^T (b - A x) is the symmetric operator
    # M + M^T - M^T A M
    A = tridiag(12)
    n = A.n_rows

    def apply(b):
        return gs_backward(A, b, gs_forward(A, b))

    S = np.column_stack([apply(e) for e in np.eye(n)])
    np.testing.assert_allclose(S, S.T, atol=1e-11)
