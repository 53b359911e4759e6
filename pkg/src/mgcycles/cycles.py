"""Multilevel preconditioners and the stationary outer iteration.

Levels are indexed from 0 (finest) to ``J-1`` (coarsest, solved exactly).
On every other level a cycle does one forward Gauss-Seidel sweep from zero,
restricts the residual, applies a coarse correction and finishes with one
backward sweep.  The coarse correction is where the cycle kinds differ:

===== ==============================================================
kind  coarse-level solver, preconditioned by the next coarser cycle
===== ==============================================================
kv    ``k`` repetitions of ``e <- e + B(r - A e)`` (V-cycle for k=1,
      W-cycle for k=2)
amli  ``k`` Chebyshev semi-iteration steps
k     ``k`` flexible CG steps (nonlinear)
h     ``k`` heavy-ball steps
n     ``k`` Nesterov steps
===== ==============================================================

When the next level is the coarsest one, its exact solve is used directly
for every kind.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Sequence, Union

import numpy as np

from .accelerators import (chebyshev_apply, heavy_ball_apply, nesterov_apply,
                           npcg_apply)
from .aggregation import Hierarchy
from .poly import SpectralBounds
from .smoothing import (_prolong_postsmooth, _presmooth_restrict, _spmv,
                        check_diagonal)

__all__ = [
    "CycleKind",
    "CycleSpec",
    "Status",
    "SolveReport",
    "MultigridCycle",
    "cycle_apply",
    "two_grid_apply",
    "stationary_solve",
    "average_factor",
    "ESTIMATE",
]

ESTIMATE = "estimate"


class CycleKind(str, Enum):
    TG = "tg"
    KV = "kv"
    AMLI = "amli"
    K = "k"
    H = "h"
    N = "n"

    @property
    def label(self) -> str:
        return _LABELS[self]

    @property
    def uses_bounds(self) -> bool:
        return self in (CycleKind.AMLI, CycleKind.H, CycleKind.N)

    @property
    def is_linear(self) -> bool:
        return self is not CycleKind.K


_LABELS = {
    CycleKind.TG: "Two-grid",
    CycleKind.KV: "kV-cycle",
    CycleKind.AMLI: "AMLI-cycle",
    CycleKind.K: "K-cycle",
    CycleKind.H: "H-cycle",
    CycleKind.N: "N-cycle",
}

BoundPolicy = Union[SpectralBounds, str]


@dataclass(frozen=True)
class CycleSpec:
    """What to run on the coarse levels.

    ``bounds`` is either a fixed :class:`SpectralBounds` used on every level
    or the string ``"estimate"`` for per-level Lanczos estimates.  ``init``
    picks the second iterate of the heavy-ball and Nesterov solvers (see
    :mod:`mgcycles.accelerators`); only ``"poly"`` makes H and N cycles
    linear operators.
    """

    kind: CycleKind
    k: int = 1
    bounds: BoundPolicy = field(default_factory=SpectralBounds)
    init: str = "sd"
    na_alt_sign: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", CycleKind(self.kind))
        if self.kind is CycleKind.TG:
            object.__setattr__(self, "k", 1)
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k}")
        if isinstance(self.bounds, str):
            if self.bounds != ESTIMATE:
                raise ValueError(f"bounds must be SpectralBounds or {ESTIMATE!r}")
        elif isinstance(self.bounds, (tuple, list)):
            object.__setattr__(self, "bounds", SpectralBounds(*self.bounds))
        elif not isinstance(self.bounds, SpectralBounds):
            raise TypeError("bounds must be SpectralBounds or 'estimate'")
        if self.init not in ("sd", "sd_euclid", "poly"):
            raise ValueError("init must be 'sd', 'sd_euclid' or 'poly'")

    @property
    def estimated(self) -> bool:
        return self.bounds == ESTIMATE

    def bounds_label(self) -> str:
        if not self.kind.uses_bounds:
            return ""
        if self.estimated:
            return ESTIMATE
        return f"fixed:{self.bounds.lambda_min:g},{self.bounds.lambda_max:g}"

    def linear_twin(self) -> "CycleSpec":
        """Same cycle with the b-independent momentum start."""
        return replace(self, init="poly")


class _LevelOperator:
    """``A @ x`` through a compiled CSR kernel (cycles call it very often)."""

    __slots__ = ("indptr", "indices", "data", "shape")

    def __init__(self, A):
        self.indptr, self.indices, self.data = A.row_offsets, A.col_indices, A.values
        self.shape = A.shape

    def __matmul__(self, x):
        return _spmv(self.indptr, self.indices, self.data,
                     np.ascontiguousarray(x, dtype=np.float64))


def _smooth_and_correct(level, b, coarse):
    """Presmooth, restrict, ``e = coarse(r)``, prolongate, postsmooth."""
    A, amap = level.A, level.aggregates
    x = np.empty_like(b)
    r = _presmooth_restrict(A.row_offsets, A.col_indices, A.values,
                            amap.assignment, amap.n_aggregates, b, x)
    e = np.ascontiguousarray(coarse(r), dtype=np.float64)
    _prolong_postsmooth(A.row_offsets, A.col_indices, A.values, amap.assignment, e, b, x)
    return x


class MultigridCycle:
    """Callable ``b -> B_level b`` for one hierarchy and cycle spec.

    ``level_bounds[l]`` are the bounds assumed for ``B_l A_l``; they are used
    when level ``l`` is the coarse level of an accelerator.  For a fixed
    policy every entry equals ``spec.bounds``.  An ``"estimate"`` policy
    requires explicit ``level_bounds`` (see :func:`mgcycles.spectral.estimate_level_bounds`).
    """

    def __init__(self, hierarchy: Hierarchy, spec: CycleSpec,
                 level_bounds: Sequence[SpectralBounds] | None = None):
        self.hierarchy = hierarchy
        self.spec = spec
        J = hierarchy.n_levels
        if level_bounds is None:
            if spec.kind.uses_bounds and spec.estimated:
                raise ValueError("estimated bounds must be computed first; "
                                 "use mgcycles.spectral.make_cycle")
            fixed = spec.bounds if isinstance(spec.bounds, SpectralBounds) else SpectralBounds()
            level_bounds = [fixed] * J
        if len(level_bounds) != J:
            raise ValueError(f"need {J} level bounds, got {len(level_bounds)}")
        self.level_bounds = list(level_bounds)
        for lv in hierarchy.levels[:-1]:
            check_diagonal(lv.A)
        self._levels = hierarchy.levels
        self._ops = [_LevelOperator(lv.A) for lv in hierarchy.levels]

    def __call__(self, b, level: int = 0) -> np.ndarray:
        return self.apply(b, level)

    def apply(self, b, level: int = 0) -> np.ndarray:
        b = np.ascontiguousarray(b, dtype=np.float64)
        if self.spec.kind is CycleKind.TG:
            if level != 0:
                raise ValueError("the two-grid method acts on level 0 only")
            return two_grid_apply(self.hierarchy, b)
        return self._apply(level, b)

    def _apply(self, l: int, b: np.ndarray) -> np.ndarray:
        J = len(self._levels)
        if l == J - 1:
            return self.hierarchy.coarse_solver.solve(b)
        if l + 1 == J - 1:
            coarse = self.hierarchy.coarse_solver.solve
        else:
            def coarse(r):
                return self._coarse_correction(l + 1, r)
        x = _smooth_and_correct(self._levels[l], b, coarse)
        if not np.isfinite(x).all():
            raise FloatingPointError(f"non-finite values in the cycle on level {l}")
        return x

    def _coarse_correction(self, lc: int, r: np.ndarray) -> np.ndarray:
        spec = self.spec
        Ac = self._ops[lc]

        def B(v):
            return self._apply(lc, np.ascontiguousarray(v))

        kind, k = spec.kind, spec.k
        if kind is CycleKind.KV:
            e = B(r)
            for _ in range(k - 1):
                e = e + B(r - Ac @ e)
            return e
        if kind is CycleKind.K:
            return npcg_apply(Ac, B, r, k)
        bounds = self.level_bounds[lc]
        if kind is CycleKind.AMLI:
            return chebyshev_apply(Ac, B, r, k, bounds)
        if kind is CycleKind.H:
            return heavy_ball_apply(Ac, B, r, k, bounds, init=spec.init)
        if kind is CycleKind.N:
            return nesterov_apply(Ac, B, r, k, bounds, init=spec.init,
                                  alt_sign=spec.na_alt_sign)
        raise ValueError(f"unsupported cycle kind {kind}")


def cycle_apply(hierarchy: Hierarchy, spec: CycleSpec, level: int, b,
                level_bounds: Sequence[SpectralBounds] | None = None) -> np.ndarray:
    """``B_level b`` for the given cycle (convenience wrapper)."""
    return MultigridCycle(hierarchy, spec, level_bounds).apply(b, level)


def two_grid_apply(hierarchy: Hierarchy, b) -> np.ndarray:
    """Forward GS, exact solve with ``A_2``, backward GS."""
    if hierarchy.n_levels < 2:
        raise ValueError("two-grid method needs at least two levels")
    b = np.ascontiguousarray(b, dtype=np.float64)
    return _smooth_and_correct(hierarchy.levels[0], b, hierarchy.second_level_solver())


# --- outer iteration ----------------------------------------------------------


class Status(str, Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"
    DIVERGED = "diverged"
    FAILED = "failed"  # setup or solve raised; only produced by the benchmark driver


@dataclass
class SolveReport:
    iterations: int
    residual_history: np.ndarray
    avg_factor: float
    status: Status
    x: np.ndarray | None = None
    error_history: np.ndarray | None = None
    message: str = ""

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED


def average_factor(history, window: int = 5) -> float:
    """``(r_m / r_{m-5})^(1/5)``; shorter histories use all available steps."""
    h = np.asarray(history, dtype=np.float64)
    m = len(h) - 1
    if m < 1:
        return math.nan
    w = min(window, m)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return float((h[m] / h[m - w]) ** (1.0 / w))


DIVERGENCE_THRESHOLD = 1e6


def stationary_solve(A, preconditioner: Callable, b, tol: float = 1e-12,
                     max_iters: int = 999, x_true=None,
                     divergence_threshold: float = DIVERGENCE_THRESHOLD) -> SolveReport:
    """Iterate ``x <- x + B(b - A x)`` from ``x = 0``.

    Stops when ``||r|| / ||b|| <= tol`` (converged), after ``max_iters``
    iterations, or when the relative residual exceeds
    ``divergence_threshold`` or stops being finite (diverged).  A
    :class:`~mgcycles.accelerators.CurvatureError` raised inside the
    preconditioner is also reported as divergence.  With ``x_true`` the
    A-norm of the error is recorded per iteration.
    """
    b = np.asarray(b, dtype=np.float64)
    nb = np.linalg.norm(b)
    if not nb > 0:
        raise ValueError("right-hand side must be nonzero")
    x = np.zeros_like(b)
    r = b.copy()
    hist = [1.0]
    errs = None
    if x_true is not None:
        x_true = np.asarray(x_true, dtype=np.float64)
        errs = [math.sqrt(max(np.dot(x_true, A @ x_true), 0.0))]
    status, message = Status.MAX_ITERATIONS, ""
    it = 0
    while it < max_iters:
        it += 1
        try:
            with np.errstate(all="ignore"):
                x += preconditioner(r)
                r = b - A @ x
        except ArithmeticError as exc:
            status, message = Status.DIVERGED, str(exc)
            hist.append(math.inf)
            break
        rel = float(np.linalg.norm(r) / nb)
        hist.append(rel)
        if errs is not None:
            e = x_true - x
            errs.append(math.sqrt(max(np.dot(e, A @ e), 0.0)))
        if not math.isfinite(rel) or rel > divergence_threshold:
            status = Status.DIVERGED
            break
        if rel <= tol:
            status = Status.CONVERGED
            break
    history = np.array(hist)
    return SolveReport(
        iterations=it,
        residual_history=history,
        avg_factor=average_factor(history),
        status=status,
        x=x,
        error_history=None if errs is None else np.array(errs),
        message=message,
    )
