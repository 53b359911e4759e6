"""Linear finite-element model problems on the unit square.

The mesh is the uniform ``m x m`` grid split into right triangles along the
``/`` diagonal of every square.  Dirichlet nodes are eliminated, so the
unknowns are the ``(m-1)^2`` interior nodes, numbered x-fastest.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.sparse as sp

from .sparse import SparseMatrix, spmv

__all__ = [
    "Example",
    "ProblemSpec",
    "assemble",
    "true_solution",
    "rhs_for",
    "jump_coefficient",
    "element_stiffness",
]


class Example(str, Enum):
    POISSON = "poisson"
    JUMP = "jump"
    ANISO = "aniso"


@dataclass(frozen=True)
class ProblemSpec:
    example: Example
    m: int
    jump_low: float = 1e-6
    epsilon: float = 1e-3

    def __post_init__(self):
        object.__setattr__(self, "example", Example(self.example))
        if int(self.m) != self.m or self.m < 2:
            raise ValueError(f"mesh parameter m must be an integer >= 2, got {self.m}")

    @property
    def h(self) -> float:
        return 1.0 / self.m

    @property
    def n_dofs(self) -> int:
        return (self.m - 1) ** 2


_JUMP_REGIONS = ((0.25, 0.5), (0.5, 0.75))


def jump_coefficient(x, y, low: float = 1e-6):
    """Diffusion coefficient: 1 on the two closed squares, ``low`` elsewhere."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    inside = np.zeros(np.broadcast(x, y).shape, dtype=bool)
    for lo, hi in _JUMP_REGIONS:
        inside |= (lo <= x) & (x <= hi) & (lo <= y) & (y <= hi)
    return np.where(inside, 1.0, low)


def element_stiffness(verts, K) -> np.ndarray:
    """3x3 P1 stiffness ``int grad(phi_i)^T K grad(phi_j)`` on one triangle."""
    verts = np.asarray(verts, dtype=np.float64)
    T = np.array([verts[1] - verts[0], verts[2] - verts[0]]).T
    area = 0.5 * abs(np.linalg.det(T))
    ref = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
    G = ref @ np.linalg.inv(T)
    return area * G @ np.asarray(K, dtype=np.float64) @ G.T


def _triangles(m):
    # vertex (i, j) has global id j*(m+1)+i, coordinates (i/m, j/m)
    i, j = np.meshgrid(np.arange(m), np.arange(m), indexing="xy")
    i, j = i.ravel(), j.ravel()
    v00 = j * (m + 1) + i
    v10 = v00 + 1
    v01 = v00 + (m + 1)
    v11 = v01 + 1
    lower = np.stack([v00, v10, v11], axis=1)
    upper = np.stack([v00, v11, v01], axis=1)
    return np.concatenate([lower, upper])


def assemble(spec: ProblemSpec) -> SparseMatrix:
    """Stiffness matrix over the interior nodes.

    Coefficients are piecewise constant per element (the jump coefficient
    is sampled at the centroid), so every element matrix is exact.
    """
    m = spec.m
    h = 1.0 / m
    tris = _triangles(m)
    coords = np.stack(np.meshgrid(np.arange(m + 1), np.arange(m + 1), indexing="xy"),
                      axis=-1).reshape(-1, 2) * h

    if spec.example is Example.ANISO:
        K = np.diag([1.0, spec.epsilon])
    else:
        K = np.eye(2)
    # all lower (resp. upper) triangles are translates of one another, and
    # the 2D P1 stiffness is scale invariant: use the unit square exactly
    n_sq = m * m
    ke_lower = element_stiffness([(0, 0), (1, 0), (1, 1)], K)
    ke_upper = element_stiffness([(0, 0), (1, 1), (0, 1)], K)
    ke = np.empty((2 * n_sq, 3, 3))
    ke[:n_sq] = ke_lower
    ke[n_sq:] = ke_upper
    if spec.example is Example.JUMP:
        cen = coords[tris].mean(axis=1)
        a = jump_coefficient(cen[:, 0], cen[:, 1], spec.jump_low)
        ke *= a[:, None, None]

    vx = np.arange((m + 1) ** 2) % (m + 1)
    vy = np.arange((m + 1) ** 2) // (m + 1)
    interior = (vx > 0) & (vx < m) & (vy > 0) & (vy < m)
    dof = np.full((m + 1) ** 2, -1, dtype=np.int64)
    dof[interior] = (vy[interior] - 1) * (m - 1) + (vx[interior] - 1)

    d = dof[tris]
    rows = np.repeat(d, 3, axis=1).ravel()
    cols = np.tile(d, (1, 3)).ravel()
    vals = ke.reshape(len(tris), 9).ravel()
    keep = (rows >= 0) & (cols >= 0)
    N = spec.n_dofs
    A = sp.coo_matrix((vals[keep], (rows[keep], cols[keep])), shape=(N, N)).tocsr()
    A.sum_duplicates()
    A.eliminate_zeros()
    # element matrices are symmetric, but summation order may differ
    A = 0.5 * (A + A.T)
    return SparseMatrix(A, symmetric=True)


def true_solution(N: int) -> np.ndarray:
    """The vector ``[1, 2, ..., N]``."""
    if N < 1:
        raise ValueError("N must be positive")
    return np.arange(1, N + 1, dtype=np.float64)


def rhs_for(A: SparseMatrix, x_true) -> np.ndarray:
    return spmv(A, x_true)
