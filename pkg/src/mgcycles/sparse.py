"""CSR storage and the kernels shared by every level of the hierarchy.

All arithmetic is float64.  Matrices are canonicalized on construction
(sorted column indices, duplicates summed) so that kernels and the
Gauss-Seidel sweep order are reproducible.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import scipy.io
import scipy.linalg
import scipy.sparse as sp

__all__ = [
    "DimensionError",
    "SetupError",
    "SparseMatrix",
    "CoarseSolver",
    "spmv",
    "triple_product",
    "coarsest_solve",
    "read_matrix_market",
    "write_matrix_market",
    "read_vector",
    "write_vector",
]


class DimensionError(ValueError):
    """Operand shapes do not conform."""


class SetupError(RuntimeError):
    """Hierarchy or factorization setup failed (non-SPD pivot, stagnation)."""


class SparseMatrix:
    """Immutable CSR matrix in canonical form.

    Parameters
    ----------
    data : scipy sparse matrix, dense array or tuple
        Anything ``scipy.sparse.csr_matrix`` accepts.
    shape : tuple, optional
        Required when ``data`` is a ``(values, col_indices, row_offsets)``
        triple whose shape cannot be inferred.
    symmetric : bool
        Flag the matrix as symmetric.  The flag is verified exactly: every
        stored ``(i, j, v)`` must have a bitwise-equal ``(j, i, v)``.
    """

    __slots__ = ("_csr", "symmetric")

    def __init__(self, data, shape=None, symmetric: bool = False):
        csr = sp.csr_matrix(data, shape=shape, dtype=np.float64, copy=True)
        csr.sum_duplicates()
        csr.sort_indices()
        csr.indptr = csr.indptr.astype(np.int64)
        csr.indices = csr.indices.astype(np.int64)
        for arr in (csr.data, csr.indices, csr.indptr):
            arr.flags.writeable = False
        self._csr = csr
        self.symmetric = False
        if symmetric:
            if not self.is_exactly_symmetric():
                raise ValueError("matrix flagged symmetric is not bitwise symmetric")
            self.symmetric = True

    @classmethod
    def from_csr_arrays(cls, row_offsets, col_indices, values, n_cols=None,
                        symmetric=False):
        row_offsets = np.asarray(row_offsets)
        n_rows = len(row_offsets) - 1
        if n_cols is None:
            n_cols = int(np.max(col_indices)) + 1 if len(col_indices) else n_rows
        return cls((np.asarray(values, dtype=np.float64), np.asarray(col_indices),
                    row_offsets), shape=(n_rows, n_cols), symmetric=symmetric)

    @classmethod
    def identity(cls, n: int) -> "SparseMatrix":
        return cls(sp.identity(n, format="csr"), symmetric=True)

    @property
    def csr(self) -> sp.csr_matrix:
        """The underlying (read-only) scipy CSR matrix."""
        return self._csr

    @property
    def shape(self) -> tuple[int, int]:
        return self._csr.shape

    @property
    def n_rows(self) -> int:
        return self._csr.shape[0]

    @property
    def n_cols(self) -> int:
        return self._csr.shape[1]

    @property
    def row_offsets(self) -> np.ndarray:
        return self._csr.indptr

    @property
    def col_indices(self) -> np.ndarray:
        return self._csr.indices

    @property
    def values(self) -> np.ndarray:
        return self._csr.data

    @property
    def nnz(self) -> int:
        return self._csr.nnz

    def diagonal(self) -> np.ndarray:
        return self._csr.diagonal()

    def toarray(self) -> np.ndarray:
        return self._csr.toarray()

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix(self._csr.T)

    @property
    def T(self) -> "SparseMatrix":
        return self.transpose()

    def is_exactly_symmetric(self) -> bool:
        if self.n_rows != self.n_cols:
            return False
        t = self._csr.T.tocsr()
        t.sort_indices()
        return (np.array_equal(t.indptr, self._csr.indptr)
                and np.array_equal(t.indices, self._csr.indices)
                and np.array_equal(t.data, self._csr.data))

    def __matmul__(self, x):
        return spmv(self, x)

    def __eq__(self, other):
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return (self.shape == other.shape
                and np.array_equal(self.row_offsets, other.row_offsets)
                and np.array_equal(self.col_indices, other.col_indices)
                and np.array_equal(self.values, other.values))

    __hash__ = None

    def __repr__(self):
        sym = ", symmetric" if self.symmetric else ""
        return f"SparseMatrix({self.n_rows}x{self.n_cols}, nnz={self.nnz}{sym})"


def spmv(A: SparseMatrix, x) -> np.ndarray:
    """Return ``A @ x``."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != A.n_cols:
        raise DimensionError(f"cannot multiply {A.shape} matrix by vector of shape {x.shape}")
    return A.csr @ x


def triple_product(P: SparseMatrix, A: SparseMatrix) -> SparseMatrix:
    """Galerkin coarse operator ``P^T A P``.

    The result is averaged with its transpose, which makes it bitwise
    symmetric (floating-point addition is commutative) without changing it
    by more than rounding.
    """
    if A.n_rows != A.n_cols:
        raise DimensionError("A must be square")
    if A.n_cols != P.n_rows:
        raise DimensionError(f"P has {P.n_rows} rows, A has {A.n_cols} columns")
    C = (P.csr.T @ (A.csr @ P.csr)).tocsr()
    C = 0.5 * (C + C.T)
    return SparseMatrix(C, symmetric=True)


class CoarseSolver:
    """Dense Cholesky factorization of a (small) SPD matrix."""

    def __init__(self, A: SparseMatrix):
        if A.n_rows != A.n_cols:
            raise DimensionError("coarsest matrix must be square")
        self.n = A.n_rows
        try:
            self._factor = scipy.linalg.cho_factor(A.toarray(), lower=True,
                                                   check_finite=True)
        except np.linalg.LinAlgError as exc:
            raise SetupError(f"coarsest matrix is not SPD: {exc}") from exc
        # called many times per cycle: skip cho_solve's argument checking
        (self._potrs,) = scipy.linalg.get_lapack_funcs(("potrs",), (self._factor[0],))

    def solve(self, b) -> np.ndarray:
        b = np.asarray(b, dtype=np.float64)
        if b.shape != (self.n,):
            raise DimensionError(f"expected rhs of length {self.n}, got {b.shape}")
        x, info = self._potrs(self._factor[0], b, lower=1, overwrite_b=0)
        if info != 0:
            raise SetupError(f"potrs failed with info={info}")
        return x


def coarsest_solve(A: SparseMatrix, b) -> np.ndarray:
    """Exact solve of ``A x = b`` by dense Cholesky."""
    return CoarseSolver(A).solve(b)


def read_matrix_market(path) -> SparseMatrix:
    """Read a Matrix Market coordinate file (general or symmetric storage)."""
    M = scipy.io.mmread(str(path))
    A = SparseMatrix(sp.csr_matrix(M))
    if A.n_rows == A.n_cols and A.is_exactly_symmetric():
        A.symmetric = True
    return A


def write_matrix_market(path, A: SparseMatrix, comment: str = "") -> None:
    """Write ``A`` in coordinate format, using symmetric storage when flagged."""
    scipy.io.mmwrite(str(path), A.csr.tocoo(), comment=comment,
                     symmetry="symmetric" if A.symmetric else "general",
                     precision=17)


def read_vector(path) -> np.ndarray:
    return np.loadtxt(Path(path), dtype=np.float64, ndmin=1)


def write_vector(path, x) -> None:
    np.savetxt(Path(path), np.asarray(x, dtype=np.float64), fmt="%.17g")
