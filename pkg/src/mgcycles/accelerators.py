"""k-step coarse-level solvers driven by a preconditioner ``B``.

Each solver approximates ``A^{-1} b`` with ``k`` applications of ``B``
starting from ``x^0 = 0``.  ``B`` is any callable ``r -> B r``; inside a
multigrid cycle it is the cycle on the next coarser level.

``init`` selects the second iterate ``x^1`` for the momentum methods:

``"sd"``
    one steepest-descent step along ``Bb`` with exact line search in the
    A-norm, ``x^1 = (b, Bb) / (A Bb, Bb) * Bb``.  This is what the cycles
    use; it makes the solver depend nonlinearly on ``b``.
``"sd_euclid"``
    the same direction scaled by ``(Bb, Bb) / (A Bb, Bb)``.  The scale mixes
    the Euclidean and A-inner products, so it is not invariant under
    rescaling of ``A``; kept for comparison only.
``"poly"``
    the b-independent start of the associated polynomial family (heavy ball:
    ``x^1 = q_0 Bb``, ``x^2 = q_1(BA) Bb``; Nesterov: ``x^1 = Bb / L``),
    so that the error is exactly ``p_k(BA) e^0``.
"""

from __future__ import annotations

import numpy as np

from .poly import (SpectralBounds, chebyshev_weights, hb_initial_q, hb_parameters,
                   na_parameter)

__all__ = [
    "CurvatureError",
    "steepest_descent_init",
    "chebyshev_apply",
    "heavy_ball_apply",
    "nesterov_apply",
    "npcg_apply",
]

_INITS = ("sd", "sd_euclid", "poly")


class CurvatureError(ArithmeticError):
    """A search direction has non-positive A-curvature (A or B not SPD)."""


def _check(k, bounds=None, init="sd"):
    if k < 1:
        raise ValueError(f"number of steps must be >= 1, got {k}")
    if init not in _INITS:
        raise ValueError(f"init must be one of {_INITS}, got {init!r}")
    if bounds is not None and not isinstance(bounds, SpectralBounds):
        raise TypeError("bounds must be a SpectralBounds")


def steepest_descent_init(A, B, b, Bb=None, euclid: bool = False) -> np.ndarray:
    """``x^1 = alpha Bb`` with ``alpha = (b, Bb) / (A Bb, Bb)``.

    This minimizes ``||x - A^{-1} b||_A`` along ``Bb``, so ``B = A^{-1}``
    gives the exact solution.  ``euclid=True`` uses ``(Bb, Bb)`` in the
    numerator instead.  Returns zero for ``b = 0``.  ``Bb`` may be passed
    if already computed.
    """
    b = np.asarray(b, dtype=np.float64)
    if not np.any(b):
        return np.zeros_like(b)
    if Bb is None:
        Bb = B(b)
    curv = np.dot(A @ Bb, Bb)
    if not curv > 0:
        raise CurvatureError(f"steepest descent: (A Bb, Bb) = {curv} is not positive")
    num = np.dot(Bb, Bb) if euclid else np.dot(b, Bb)
    return (num / curv) * Bb


def chebyshev_apply(A, B, b, k: int, bounds: SpectralBounds) -> np.ndarray:
    """k steps of the Chebyshev semi-iteration with ``x^1 = Bb``.

    ``x^{j+1} = w_j [x^j + B(b - A x^j) - x^{j-1}] + x^{j-1}``; for
    ``lambda_min = lambda_max`` the weights are 1 and the iteration is plain
    preconditioned Richardson.
    """
    _check(k, bounds)
    b = np.asarray(b, dtype=np.float64)
    x_prev = np.zeros_like(b)
    x = B(b)
    for w in chebyshev_weights(k, bounds):
        x, x_prev = w * (x + B(b - A @ x) - x_prev) + x_prev, x
    return x


def heavy_ball_apply(A, B, b, k: int, bounds: SpectralBounds, init: str = "sd") -> np.ndarray:
    """k steps of preconditioned heavy ball,
    ``x^i = x^{i-1} + alpha B(b - A x^{i-1}) + beta (x^{i-1} - x^{i-2})``.

    ``alpha = 4 / (sqrt(L) + sqrt(mu))^2`` and
    ``beta = ((sqrt(L) - sqrt(mu)) / (sqrt(L) + sqrt(mu)))^2``.  With
    ``lambda_min = 0`` this is ``alpha = 4/L, beta = 1``, which is allowed
    and typically diverges.
    """
    _check(k, bounds, init)
    b = np.asarray(b, dtype=np.float64)
    alpha, beta = hb_parameters(bounds)
    x_prev = np.zeros_like(b)
    Bb = B(b)
    if init != "poly":
        x = steepest_descent_init(A, B, b, Bb, euclid=init == "sd_euclid")
        first = 2
    else:
        q0, c0, c1 = hb_initial_q(bounds)
        x = q0 * Bb
        first = 2
        if k >= 2:
            x_prev, x = x, c0 * Bb - c1 * B(A @ Bb)
            first = 3
        else:
            return x
    for _ in range(first, k + 1):
        x, x_prev = x + alpha * B(b - A @ x) + beta * (x - x_prev), x
    return x


def nesterov_apply(A, B, b, k: int, bounds: SpectralBounds, init: str = "sd",
                   alt_sign: bool = False) -> np.ndarray:
    """k steps of preconditioned Nesterov acceleration with step ``1/L``.

    ``x^i = (1+beta) y^i - beta y^{i-1}`` where
    ``y^i = x^{i-1} + (1/L) B(b - A x^{i-1})`` and
    ``beta = (sqrt(L) - sqrt(mu)) / (sqrt(L) + sqrt(mu))``.

    ``alt_sign=True`` uses ``x^{i-2} - (1/L) B(b - A x^{i-2})`` in the
    momentum term instead; it does not correspond to Nesterov's method and
    is only kept for comparison.
    """
    _check(k, bounds, init)
    b = np.asarray(b, dtype=np.float64)
    L = bounds.lambda_max
    beta = na_parameter(bounds)
    Bb = B(b)
    x_prev = np.zeros_like(b)
    if init == "poly":
        x = Bb / L
    else:
        x = steepest_descent_init(A, B, b, Bb, euclid=init == "sd_euclid")
    y_prev = Bb / L  # y^1 = x^0 + (1/L) B(b - A x^0)
    for _ in range(2, k + 1):
        y = x + B(b - A @ x) / L
        if alt_sign:
            x, x_prev = (1.0 + beta) * y - beta * (2.0 * x_prev - y_prev), x
        else:
            x, x_prev = (1.0 + beta) * y - beta * y_prev, x
        y_prev = y
    return x


def npcg_apply(A, B, b, k: int) -> np.ndarray:
    """k steps of flexible (nonlinearly preconditioned) conjugate gradients.

    Each new direction ``B r`` is A-orthogonalized against all previous
    directions, followed by an exact line search.  Stops early on a zero
    residual.
    """
    _check(k)
    b = np.asarray(b, dtype=np.float64)
    x = np.zeros_like(b)
    r = b.copy()
    dirs: list[tuple[np.ndarray, np.ndarray, float]] = []
    for _ in range(k):
        if not np.any(r):
            break
        d = B(r)
        for dj, Adj, cj in dirs:
            d = d - (np.dot(d, Adj) / cj) * dj
        Ad = A @ d
        curv = np.dot(d, Ad)
        if not curv > 0:
            raise CurvatureError(f"NPCG: direction curvature {curv} is not positive")
        step = np.dot(d, r) / curv
        x += step * d
        r -= step * Ad
        dirs.append((d, Ad, curv))
    return x
