"""Extreme eigenvalue estimates of ``B_l A_l`` by preconditioned Lanczos.

The Lanczos coefficients come from a preconditioned CG run on
``A x = r_0`` with a seeded random ``r_0``: with CG step lengths
``alpha_j`` and direction updates ``beta_j`` the tridiagonal matrix is

    T[j, j]     = 1/alpha_j + beta_{j-1}/alpha_{j-1}
    T[j, j+1]   = sqrt(beta_j) / alpha_j

and its eigenvalues are Ritz values of ``B A`` (self-adjoint in the
``B^{-1}`` inner product).  ``B`` must be linear and SPD.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from .aggregation import Hierarchy
from .cycles import CycleKind, CycleSpec, MultigridCycle
from .poly import SpectralBounds
from .sparse import SetupError

__all__ = [
    "RitzEstimate",
    "ritz_values",
    "lanczos_estimate",
    "estimate_bounds",
    "estimate_level_bounds",
    "make_cycle",
    "LAMBDA_MIN_SAFETY",
    "DEFAULT_STEPS",
]

LAMBDA_MIN_SAFETY = 0.95
DEFAULT_STEPS = 20

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RitzEstimate:
    """Safeguarded extreme eigenvalue estimates.

    ``lambda_min_est`` is the smallest Ritz value times 0.95 and
    ``lambda_max_est`` the largest Ritz value, raised to 1 if smaller.
    ``ritz`` keeps the raw Ritz values (ascending).
    """

    lambda_min_est: float
    lambda_max_est: float
    steps_used: int
    ritz: np.ndarray = field(default_factory=lambda: np.ones(1), repr=False)

    def __post_init__(self):
        if not 0 < self.lambda_min_est <= self.lambda_max_est:
            raise ValueError(
                f"need 0 < lambda_min <= lambda_max, got "
                f"({self.lambda_min_est}, {self.lambda_max_est})")

    @property
    def bounds(self) -> SpectralBounds:
        return SpectralBounds(self.lambda_min_est, self.lambda_max_est)


def ritz_values(A, B: Callable, m_steps: int = DEFAULT_STEPS, seed: int = 0,
                r0=None) -> np.ndarray:
    """Ritz values of ``B A`` after at most ``m_steps`` PCG steps.

    Stops early on a vanishing residual (the Krylov space is invariant) and
    raises ``SetupError`` on non-positive curvature.  Returns the Ritz values
    in ascending order; the number of values is the number of steps taken.
    """
    if m_steps < 1:
        raise ValueError("m_steps must be >= 1")
    n = A.shape[0]
    if r0 is None:
        r = np.random.default_rng(seed).standard_normal(n)
    else:
        r = np.array(r0, dtype=np.float64)
    scale = np.linalg.norm(r)
    if not scale > 0:
        raise ValueError("Lanczos start vector must be nonzero")
    r /= scale
    z = B(r)
    p = z.copy()
    rz = float(np.dot(r, z))
    if not rz > 0:
        raise SetupError(f"preconditioner is not positive definite: (r, Br) = {rz}")
    alphas, betas = [], []
    # relative breakdown tolerance on the preconditioned residual norm
    tiny = 1e-14 * rz
    for _ in range(min(m_steps, n)):
        Ap = A @ p
        curv = float(np.dot(p, Ap))
        if not curv > 0:
            raise SetupError(f"non-positive curvature {curv} in Lanczos")
        alpha = rz / curv
        alphas.append(alpha)
        r = r - alpha * Ap
        z = B(r)
        rz_new = float(np.dot(r, z))
        if len(alphas) == m_steps or not rz_new > tiny:
            break
        beta = rz_new / rz
        betas.append(beta)
        p = z + beta * p
        rz = rz_new
    k = len(alphas)
    a = np.asarray(alphas)
    diag = 1.0 / a
    diag[1:] += np.asarray(betas[: k - 1]) / a[:-1]
    off = np.sqrt(np.asarray(betas[: k - 1])) / a[:-1]
    if k == 1:
        return diag
    return scipy.linalg.eigh_tridiagonal(diag, off, eigvals_only=True)


def lanczos_estimate(A, B: Callable, m_steps: int = DEFAULT_STEPS, seed: int = 0,
                     safety: float = LAMBDA_MIN_SAFETY) -> RitzEstimate:
    """Safeguarded bounds for ``B A`` from :func:`ritz_values`."""
    theta = ritz_values(A, B, m_steps, seed)
    lo, hi = float(theta[0]), float(theta[-1])
    if not lo > 0:
        raise SetupError(f"smallest Ritz value {lo} is not positive")
    return RitzEstimate(safety * lo, max(hi, 1.0), len(theta), theta)


def _check_estimable(spec: CycleSpec, level: int):
    if spec.kind is CycleKind.K:
        raise ValueError("K-cycle preconditioners are nonlinear; Lanczos bounds are undefined")
    if spec.kind is CycleKind.TG and level != 0:
        raise ValueError("the two-grid method acts on level 0 only")


def estimate_bounds(hierarchy: Hierarchy, level: int, spec: CycleSpec,
                    m_steps: int = DEFAULT_STEPS, seed: int = 0,
                    level_bounds=None) -> RitzEstimate:
    """Bounds for ``B_level A_level`` where ``B_level`` is the cycle ``spec``.

    The coarsest level returns ``(1, 1)``.  Momentum cycles are estimated
    through their linear twin (b-independent start).  ``level_bounds``
    supplies the bounds used on coarser levels; for an ``"estimate"`` spec
    they are computed here when missing.
    """
    J = hierarchy.n_levels
    if not 0 <= level < J:
        raise IndexError(f"level {level} outside 0..{J - 1}")
    _check_estimable(spec, level)
    if level == J - 1:
        return RitzEstimate(1.0, 1.0, 0)
    lin = spec.linear_twin()
    if level_bounds is None:
        if spec.kind.uses_bounds and spec.estimated:
            level_bounds = estimate_level_bounds(hierarchy, spec, m_steps, seed,
                                                 down_to=level + 1)
            level_bounds = [SpectralBounds()] * (level + 1) + level_bounds[level + 1:]
    cycle = MultigridCycle(hierarchy, lin, level_bounds)
    A = hierarchy.A(level)
    return lanczos_estimate(A.csr, lambda v: cycle.apply(v, level), m_steps, seed)


def estimate_level_bounds(hierarchy: Hierarchy, spec: CycleSpec,
                          m_steps: int = DEFAULT_STEPS, seed: int = 0,
                          down_to: int = 1) -> list[SpectralBounds]:
    """Per-level bounds computed bottom-up and frozen.

    Level ``J-1`` gets ``(1, 1)``; level ``l`` is estimated with the bounds
    of levels ``l+1 ..`` already fixed.  Levels above ``down_to`` are never
    used as coarse levels and keep the default ``(0, 1)`` placeholder.
    """
    J = hierarchy.n_levels
    out = [SpectralBounds()] * J
    out[J - 1] = SpectralBounds(1.0, 1.0)
    for level in range(J - 2, max(down_to, 0) - 1, -1):
        est = estimate_bounds(hierarchy, level, spec, m_steps, seed, level_bounds=out)
        out[level] = est.bounds
        log.debug("level %d: bounds (%.6g, %.6g) from %d steps", level,
                  est.lambda_min_est, est.lambda_max_est, est.steps_used)
    return out


def make_cycle(hierarchy: Hierarchy, spec: CycleSpec, m_steps: int = DEFAULT_STEPS,
               seed: int = 0) -> MultigridCycle:
    """Cycle with fixed bounds, or with per-level estimates for ``"estimate"``."""
    if spec.kind.uses_bounds and spec.estimated:
        return MultigridCycle(hierarchy, spec,
                              estimate_level_bounds(hierarchy, spec, m_steps, seed))
    return MultigridCycle(hierarchy, spec)
