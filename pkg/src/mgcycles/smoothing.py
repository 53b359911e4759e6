"""Gauss-Seidel sweeps used as pre- and post-smoother.

The forward sweep from a zero initial guess realizes ``x = M b`` with
``M = (D + L)^{-1}``; the backward sweep realizes
``x <- x + M^T (b - A x)``.  Row order of the CSR storage is the sweep
order.
"""

import numba as nb
import numpy as np

from .sparse import DimensionError, SparseMatrix

__all__ = ["gs_forward", "gs_backward", "check_diagonal"]


@nb.njit(cache=True, nogil=True)
def _forward(indptr, indices, data, b, x):
    n = len(b)
    for i in range(n):
        s = b[i]
        d = 0.0
        for jj in range(indptr[i], indptr[i + 1]):
            j = indices[jj]
            if j == i:
                d = data[jj]
            else:
                s -= data[jj] * x[j]
        x[i] = s / d


@nb.njit(cache=True, nogil=True)
def _backward(indptr, indices, data, b, x):
    n = len(b)
    for i in range(n - 1, -1, -1):
        s = b[i]
        d = 0.0
        for jj in range(indptr[i], indptr[i + 1]):
            j = indices[jj]
            if j == i:
                d = data[jj]
            else:
                s -= data[jj] * x[j]
        x[i] = s / d


@nb.njit(cache=True, nogil=True)
def _spmv(indptr, indices, data, x):
    n = len(indptr) - 1
    y = np.empty(n)
    for i in range(n):
        s = 0.0
        for jj in range(indptr[i], indptr[i + 1]):
            s += data[jj] * x[indices[jj]]
        y[i] = s
    return y


@nb.njit(cache=True, nogil=True)
def _presmooth_restrict(indptr, indices, data, agg, n_coarse, b, x):
    """Forward sweep from zero into ``x``; return ``P^T (b - A x)`` for a
    piecewise-constant ``P`` given by the aggregate ids ``agg``."""
    n = len(b)
    for i in range(n):
        x[i] = 0.0
    _forward(indptr, indices, data, b, x)
    rc = np.zeros(n_coarse)
    for i in range(n):
        s = b[i]
        for jj in range(indptr[i], indptr[i + 1]):
            s -= data[jj] * x[indices[jj]]
        rc[agg[i]] += s
    return rc


@nb.njit(cache=True, nogil=True)
def _prolong_postsmooth(indptr, indices, data, agg, e, b, x):
    """``x += P e`` followed by a backward sweep."""
    for i in range(len(x)):
        x[i] += e[agg[i]]
    _backward(indptr, indices, data, b, x)


def check_diagonal(A: SparseMatrix) -> None:
    """Raise ``ValueError`` unless every diagonal entry is positive."""
    d = A.diagonal()
    if d.size and not np.all(d > 0):
        bad = int(np.flatnonzero(~(d > 0))[0])
        raise ValueError(f"Gauss-Seidel needs a positive diagonal; a[{bad},{bad}] = {d[bad]}")


def _prepare(A, b, x):
    if A.n_rows != A.n_cols or len(b) != A.n_rows:
        raise DimensionError("Gauss-Seidel operands do not conform")
    if x is None:
        x = np.zeros(A.n_rows)
    elif len(x) != A.n_rows:
        raise DimensionError("Gauss-Seidel operands do not conform")
    return np.ascontiguousarray(b, dtype=np.float64), x


def gs_forward(A: SparseMatrix, b, x=None, check: bool = True) -> np.ndarray:
    """One forward (ascending rows) Gauss-Seidel sweep, in place on ``x``.

    ``x=None`` starts from zero.  Returns ``x``.  Pass ``check=False``
    inside cycles where the diagonal was validated at setup.
    """
    b, x = _prepare(A, b, x)
    if check:
        check_diagonal(A)
    _forward(A.row_offsets, A.col_indices, A.values, b, x)
    return x


def gs_backward(A: SparseMatrix, b, x=None, check: bool = True) -> np.ndarray:
    """One backward (descending rows) Gauss-Seidel sweep, in place on ``x``."""
    b, x = _prepare(A, b, x)
    if check:
        check_diagonal(A)
    _backward(A.row_offsets, A.col_indices, A.values, b, x)
    return x
