"""Unsmoothed aggregation: aggregates, piecewise-constant prolongation and
the Galerkin hierarchy."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field

import numba as nb
import numpy as np
import scipy.sparse as sp

from .smoothing import check_diagonal
from .sparse import CoarseSolver, SetupError, SparseMatrix, triple_product

__all__ = [
    "AggregateMap",
    "Level",
    "Hierarchy",
    "aggregate",
    "build_prolongation",
    "build_hierarchy",
    "DEFAULT_THETA",
    "DEFAULT_COARSEST_SIZE",
    "DEFAULT_MAX_LEVELS",
]

DEFAULT_THETA = 0.08
DEFAULT_COARSEST_SIZE = 100
DEFAULT_MAX_LEVELS = 20
STAGNATION_SLACK = 2

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AggregateMap:
    assignment: np.ndarray
    n_aggregates: int

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=np.int64)
        if a.ndim != 1:
            raise ValueError("assignment must be one-dimensional")
        if len(a) and (a.min() < 0 or a.max() >= self.n_aggregates):
            raise ValueError("aggregate id out of range")
        if np.unique(a).size != self.n_aggregates:
            raise ValueError("every aggregate must be non-empty")
        a.flags.writeable = False
        object.__setattr__(self, "assignment", a)

    @property
    def n_fine(self) -> int:
        return len(self.assignment)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.n_aggregates)


@nb.njit(cache=True)
def _greedy(indptr, indices, data, diag, theta):
    n = len(diag)
    agg = np.full(n, -1, dtype=np.int64)
    n_agg = 0
    # pass 1: seed an aggregate at every node that still has an
    # unaggregated strong neighbor
    for i in range(n):
        if agg[i] >= 0:
            continue
        has_free = False
        for jj in range(indptr[i], indptr[i + 1]):
            j = indices[jj]
            if j != i and agg[j] < 0 and abs(data[jj]) >= theta * np.sqrt(diag[i] * diag[j]):
                has_free = True
                break
        if not has_free:
            continue
        agg[i] = n_agg
        for jj in range(indptr[i], indptr[i + 1]):
            j = indices[jj]
            if j != i and agg[j] < 0 and abs(data[jj]) >= theta * np.sqrt(diag[i] * diag[j]):
                agg[j] = n_agg
        n_agg += 1
    first_pass = agg.copy()
    # pass 2: leftovers join the pass-1 aggregate they are most strongly
    # connected to; nodes without strong connections become singletons
    for i in range(n):
        if agg[i] >= 0:
            continue
        best = -1
        best_val = -1.0
        for jj in range(indptr[i], indptr[i + 1]):
            j = indices[jj]
            if j == i or first_pass[j] < 0:
                continue
            v = abs(data[jj])
            if v >= theta * np.sqrt(diag[i] * diag[j]) and v > best_val:
                best_val = v
                best = first_pass[j]
        if best >= 0:
            agg[i] = best
        else:
            agg[i] = n_agg
            n_agg += 1
    return agg, n_agg


def aggregate(A: SparseMatrix, theta: float = DEFAULT_THETA) -> AggregateMap:
    """Greedy strength-based aggregation.

    Node ``j`` is a strong neighbor of ``i`` when
    ``|a_ij| >= theta * sqrt(a_ii * a_jj)``.  Nodes are swept in index
    order; a node with at least one unaggregated strong neighbor seeds a new
    aggregate made of itself and all of those neighbors.  Remaining nodes join
    the neighboring aggregate with the largest ``|a_ij|`` (lowest index on
    ties), or become singletons when they have no strong neighbor.
    """
    if not 0.0 <= theta < 1.0:
        raise ValueError(f"theta must lie in [0, 1), got {theta}")
    check_diagonal(A)
    agg, n_agg = _greedy(A.row_offsets, A.col_indices, A.values, A.diagonal(), float(theta))
    return AggregateMap(agg, int(n_agg))


def build_prolongation(amap: AggregateMap) -> SparseMatrix:
    n = amap.n_fine
    P = sp.csr_matrix((np.ones(n), amap.assignment, np.arange(n + 1)),
                      shape=(n, amap.n_aggregates))
    return SparseMatrix(P)


@dataclass(frozen=True)
class Level:
    A: SparseMatrix
    P: SparseMatrix | None = None
    aggregates: AggregateMap | None = None

    @property
    def n(self) -> int:
        return self.A.n_rows


@dataclass
class Hierarchy:
    """Levels ``0 .. J-1``; level ``J-1`` is solved exactly.

    No solve mutates the hierarchy, so one instance can serve many cycles.
    The only lazily built member is the level-2 factorization used by the
    two-grid method.
    """

    levels: list[Level]
    coarse_solver: CoarseSolver
    theta: float = DEFAULT_THETA
    _second_level_solver: object = field(default=None, repr=False)

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    @property
    def J(self) -> int:
        return len(self.levels)

    def A(self, level: int) -> SparseMatrix:
        return self.levels[level].A

    def P(self, level: int) -> SparseMatrix:
        return self.levels[level].P

    def dims(self) -> list[int]:
        return [lv.n for lv in self.levels]

    def operator_complexity(self) -> float:
        return sum(lv.A.nnz for lv in self.levels) / self.levels[0].A.nnz

    def second_level_solver(self):
        """Sparse LU of ``A_2`` (level index 1), used by the two-grid method."""
        if self.n_levels < 2:
            raise SetupError("two-grid method needs at least two levels")
        if self._second_level_solver is None:
            if self.n_levels == 2:
                self._second_level_solver = self.coarse_solver.solve
            else:
                from scipy.sparse.linalg import splu
                try:
                    lu = splu(self.levels[1].A.csr.tocsc())
                except RuntimeError as exc:
                    raise SetupError(f"level-2 factorization failed: {exc}") from exc
                self._second_level_solver = lu.solve
        return self._second_level_solver

    def summary_rows(self, bounds=None) -> list[dict]:
        rows = []
        for i, lv in enumerate(self.levels):
            row = {"level": i + 1, "n": lv.n, "nnz": lv.A.nnz}
            if bounds is not None:
                lo, hi = bounds[i]
                row["lambda_min"] = f"{lo:.6g}"
                row["lambda_max"] = f"{hi:.6g}"
            rows.append(row)
        return rows

    def summary_csv(self, bounds=None) -> str:
        rows = self.summary_rows(bounds)
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        buf.write(f"# operator_complexity,{self.operator_complexity():.6f}\n")
        return buf.getvalue()


def build_hierarchy(A: SparseMatrix, theta: float = DEFAULT_THETA,
                    coarsest_size: int = DEFAULT_COARSEST_SIZE,
                    max_levels: int = DEFAULT_MAX_LEVELS) -> Hierarchy:
    """Aggregate and Galerkin-coarsen until ``n <= coarsest_size`` or
    ``max_levels`` levels exist, then factorize the coarsest matrix.

    If aggregation finds no strong couplings on a level of at most
    ``STAGNATION_SLACK * coarsest_size`` unknowns, that level becomes the
    coarsest one.  Otherwise stagnation raises ``SetupError``, as does a
    coarsest matrix that is not SPD.
    """
    if coarsest_size < 1 or max_levels < 1:
        raise ValueError("coarsest_size and max_levels must be positive")
    if A.n_rows != A.n_cols:
        raise ValueError("matrix must be square")
    levels: list[Level] = []
    current = A
    while current.n_rows > coarsest_size and len(levels) + 1 < max_levels:
        amap = aggregate(current, theta)
        if amap.n_aggregates >= current.n_rows:
            # no strong couplings left; fine as the coarsest level if small
            if current.n_rows <= STAGNATION_SLACK * coarsest_size:
                log.info("aggregation stagnated at n=%d; using it as coarsest level",
                         current.n_rows)
                break
            raise SetupError(
                f"aggregation stagnated on level {len(levels) + 1}: "
                f"{current.n_rows} nodes gave {amap.n_aggregates} aggregates "
                f"(theta={theta})")
        P = build_prolongation(amap)
        levels.append(Level(current, P, amap))
        current = triple_product(P, current)
    levels.append(Level(current))
    return Hierarchy(levels, CoarseSolver(current), theta)
