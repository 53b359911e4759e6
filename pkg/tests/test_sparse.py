"""Sparse storage, Galerkin products, coarsest solve and file I/O."""

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_spd, tridiag
from mgcycles import (CoarseSolver, DimensionError, SetupError, SparseMatrix, spmv,
                      triple_product)
from mgcycles.sparse import (coarsest_solve, read_matrix_market, read_vector,
                             write_matrix_market, write_vector)


class TestSpmv:
    def test_identity(self):
        x = np.array([3.0, -1.0, 2.5])
        np.testing.assert_array_equal(spmv(SparseMatrix.identity(3), x), x)

    def test_stencil(self):
        np.testing.assert_array_equal(spmv(tridiag(2), np.ones(2)), [1.0, 1.0])

    def test_zero_matrix(self):
        Z = SparseMatrix(sp.csr_matrix((4, 4)))
        np.testing.assert_array_equal(spmv(Z, np.arange(4.0)), np.zeros(4))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            spmv(SparseMatrix.identity(3), np.ones(4))

    @given(st.integers(1, 30), st.integers(0, 2**32 - 1))
    def test_matches_dense(self, n, seed):
        rng = np.random.default_rng(seed)
        M = rng.standard_normal((n, n)) * (rng.random((n, n)) < 0.3)
        x = rng.standard_normal(n)
        np.testing.assert_allclose(spmv(SparseMatrix(M), x), M @ x, atol=1e-12)


class TestStorage:
    def test_canonical_form(self):
        # duplicates summed, columns sorted
        A = SparseMatrix.from_csr_arrays([0, 3, 4], [1, 0, 1, 1], [1.0, 2.0, 3.0, 4.0])
        np.testing.assert_array_equal(A.row_offsets, [0, 2, 3])
        np.testing.assert_array_equal(A.col_indices, [0, 1, 1])
        np.testing.assert_array_equal(A.values, [2.0, 4.0, 4.0])

    def test_read_only(self):
        A = tridiag(3)
        with pytest.raises(ValueError):
            A.values[0] = 5.0

    def test_symmetric_flag_is_verified(self):
        with pytest.raises(ValueError):
            SparseMatrix(np.array([[1.0, 2.0], [0.0, 1.0]]), symmetric=True)


class TestTripleProduct:
    def test_identity_prolongation(self):
        A = tridiag(5)
        assert triple_product(SparseMatrix.identity(5), A) == A

    def test_sum_prolongation(self):
        C = triple_product(SparseMatrix(np.ones((2, 1))), SparseMatrix.identity(2))
        np.testing.assert_array_equal(C.toarray(), [[2.0]])

    def test_random_against_dense(self):
        rng = np.random.default_rng(7)
        A = random_spd(rng, 8)
        P = (rng.random((8, 3)) < 0.5) * rng.standard_normal((8, 3))
        C = triple_product(SparseMatrix(P), SparseMatrix(A))
        np.testing.assert_allclose(C.toarray(), P.T @ A @ P, atol=1e-12)

    @given(st.integers(2, 25), st.integers(1, 10), st.integers(0, 2**32 - 1))
    def test_bitwise_symmetric(self, n, nc, seed):
        rng = np.random.default_rng(seed)
        A = random_spd(rng, n)
        P = rng.standard_normal((n, nc))
        C = triple_product(SparseMatrix(P), SparseMatrix(A))
        assert C.symmetric and C.is_exactly_symmetric()

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            triple_product(SparseMatrix.identity(3), tridiag(4))


class TestCoarseSolve:
    def test_two_by_two(self):
        np.testing.assert_allclose(coarsest_solve(tridiag(2), [1.0, 0.0]),
                                   [2.0 / 3.0, 1.0 / 3.0], atol=1e-15)

    def test_zero_rhs(self):
        np.testing.assert_array_equal(coarsest_solve(tridiag(4), np.zeros(4)), np.zeros(4))

    def test_not_spd(self):
        with pytest.raises(SetupError):
            CoarseSolver(SparseMatrix(np.array([[1.0, 2.0], [2.0, 1.0]])))

    @given(st.integers(1, 40), st.integers(0, 2**32 - 1))
    def test_matches_dense_solve(self, n, seed):
        rng = np.random.default_rng(seed)
        A = random_spd(rng, n, cond=100.0)
        b = rng.standard_normal(n)
        x = CoarseSolver(SparseMatrix(A)).solve(b)
        np.testing.assert_allclose(A @ x, b, atol=1e-10 * max(1.0, np.linalg.norm(b)))


class TestFiles:
    def test_matrix_market_round_trip(self, tmp_path, poisson8):
        path = tmp_path / "a.mtx"
        write_matrix_market(path, poisson8, comment="poisson")
        B = read_matrix_market(path)
        assert B == poisson8 and B.symmetric

    def test_general_storage(self, tmp_path):
        A = SparseMatrix(np.array([[1.0, 2.0], [0.0, 3.0]]))
        write_matrix_market(tmp_path / "g.mtx", A)
        B = read_matrix_market(tmp_path / "g.mtx")
        assert B == A and not B.symmetric

    def test_vector_round_trip(self, tmp_path):
        x = np.random.default_rng(1).standard_normal(17)
        write_vector(tmp_path / "x.txt", x)
        np.testing.assert_array_equal(read_vector(tmp_path / "x.txt"), x)
