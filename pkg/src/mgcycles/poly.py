"""Error polynomials of the semi-iterative coarse solvers.

Every k-step solver used as a coarse-level correction (Chebyshev, heavy
ball, Nesterov) produces an error ``e^k = p_k(BA) e^0`` with ``p_k(0) = 1``,
equivalently an approximate inverse ``q_{k-1}(BA) B`` where
``p_k(x) = 1 - x q_{k-1}(x)``.  This module evaluates those polynomials by
their three-term recurrences, the step parameters shared with
:mod:`mgcycles.accelerators`, the a-priori error bounds, and the
two-grid thresholds under which the H- and N-cycles are uniform.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "SpectralBounds",
    "Family",
    "PolynomialSpec",
    "UndefinedPolynomialError",
    "cheb_T",
    "chebyshev_weights",
    "hb_parameters",
    "hb_initial_q",
    "na_parameter",
    "p_eval",
    "q_eval",
    "curve_data",
    "curves_csv",
    "hb_bound",
    "na_bound",
    "ThresholdResult",
    "solve_threshold",
    "threshold_function",
]


@dataclass(frozen=True)
class SpectralBounds:
    """Interval ``[lambda_min, lambda_max]`` assumed to contain the spectrum of ``BA``."""

    lambda_min: float = 0.0
    lambda_max: float = 1.0

    def __post_init__(self):
        lo, hi = float(self.lambda_min), float(self.lambda_max)
        if not hi > 0:
            raise ValueError(f"lambda_max must be positive, got {hi}")
        if not 0 <= lo <= hi:
            raise ValueError(f"need 0 <= lambda_min <= lambda_max, got ({lo}, {hi})")
        object.__setattr__(self, "lambda_min", lo)
        object.__setattr__(self, "lambda_max", hi)

    @property
    def kappa(self) -> float:
        if self.lambda_min == 0:
            return math.inf
        return self.lambda_max / self.lambda_min

    def __iter__(self):
        yield self.lambda_min
        yield self.lambda_max


class Family(str, Enum):
    CHEBYSHEV = "cheb"
    HB = "hb"
    NA = "na"


class UndefinedPolynomialError(ValueError):
    """Heavy-ball polynomials need ``lambda_min > 0``."""


@dataclass(frozen=True)
class PolynomialSpec:
    family: Family
    k: int
    bounds: SpectralBounds = SpectralBounds()

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.k < 0:
            raise ValueError("degree must be non-negative")
        if self.family is Family.HB and self.bounds.lambda_min == 0:
            raise UndefinedPolynomialError(
                "heavy-ball polynomial undefined for lambda_min = 0 (q_0 and q_1 blow up)")


def cheb_T(k: int, t):
    """Chebyshev polynomial of the first kind via ``C_k = 2t C_{k-1} - C_{k-2}``."""
    if k < 0:
        raise ValueError("k must be non-negative")
    t = np.asarray(t, dtype=np.float64)
    c0, c1 = np.ones_like(t), t.copy()
    if k == 0:
        return c0 if c0.ndim else float(c0)
    for _ in range(k - 1):
        c0, c1 = c1, 2.0 * t * c1 - c0
    return c1 if c1.ndim else float(c1)


def chebyshev_weights(k: int, bounds: SpectralBounds) -> np.ndarray:
    """Weights ``w_j = 2 C_j(1/rho) / (rho C_{j+1}(1/rho))`` for ``j = 1..k-1``.

    ``rho = 1 - lambda_min/lambda_max``.  The ratio ``C_{j+1}/C_j`` is
    propagated instead of ``C_j`` itself so large ``1/rho`` cannot overflow.
    ``rho = 0`` gives the limit ``w_j = 1`` (plain preconditioned Richardson).
    """
    rho = 1.0 - bounds.lambda_min / bounds.lambda_max
    if rho == 0.0:
        return np.ones(max(k - 1, 0))
    t = 1.0 / rho
    w = np.empty(max(k - 1, 0))
    s = t  # C_1 / C_0
    for j in range(1, k):
        s = 2.0 * t - 1.0 / s  # C_{j+1} / C_j
        w[j - 1] = 2.0 / (rho * s)
    return w


def hb_parameters(bounds: SpectralBounds) -> tuple[float, float]:
    """Heavy-ball step ``alpha`` and momentum ``beta``."""
    sl, sm = math.sqrt(bounds.lambda_max), math.sqrt(bounds.lambda_min)
    return 4.0 / (sl + sm) ** 2, ((sl - sm) / (sl + sm)) ** 2


def hb_initial_q(bounds: SpectralBounds) -> tuple[float, float, float]:
    """``(q0, c0, c1)`` with ``q_0 = q0`` and ``q_1(x) = c0 - c1 x``.

    These starting polynomials make the heavy-ball ``q_k`` the best uniform
    approximation of ``1/x`` on the interval.
    """
    lo, hi = bounds.lambda_min, bounds.lambda_max
    if lo == 0:
        raise UndefinedPolynomialError("heavy-ball q_0, q_1 need lambda_min > 0")
    q0 = 1.0 / (2.0 * hi) + 1.0 / (2.0 * lo)
    return q0, 1.0 / math.sqrt(hi * lo) + q0, 1.0 / (hi * lo)


def na_parameter(bounds: SpectralBounds) -> float:
    sl, sm = math.sqrt(bounds.lambda_max), math.sqrt(bounds.lambda_min)
    return (sl - sm) / (sl + sm)


def _as_array(x):
    x = np.asarray(x, dtype=np.float64)
    return x, x.ndim == 0


def _hb_q(k, bounds, x):
    q0, c0, c1 = hb_initial_q(bounds)
    alpha, beta = hb_parameters(bounds)
    qm, q = np.full_like(x, q0), c0 - c1 * x
    if k == 0:
        return qm
    for _ in range(k - 1):
        qm, q = q, q + alpha * (1.0 - x * q) + beta * (q - qm)
    return q


def _na_q(k, bounds, x):
    L = bounds.lambda_max
    beta = na_parameter(bounds)
    qm, q = np.zeros_like(x), np.full_like(x, 1.0 / L)
    for _ in range(k):
        qm, q = q, q + (1.0 - x * q) / L + beta * (1.0 - x / L) * (q - qm)
    return q


def p_eval(spec: PolynomialSpec, x):
    """Error polynomial ``p_k`` at ``x`` (scalar or array).

    * Chebyshev: ``p_0 = 1``, ``p_1 = 1 - x``, then
      ``p_{j+1} = w_j ((1 - x) p_j - p_{j-1}) + p_{j-1}``.
    * Heavy ball: ``p_k = 1 - x q_{k-1}`` with the best-approximation
      ``q_0, q_1`` and ``p_{j+1} = (1 - a x) p_j + b (p_j - p_{j-1})`` after.
    * Nesterov: ``p_0 = 1``, ``p_1 = 1 - x/L`` and
      ``p_{j+1} = (1 + b)(1 - x/L) p_j - b (1 - x/L) p_{j-1}``.
    """
    x, scalar = _as_array(x)
    k, b = spec.k, spec.bounds
    if k == 0:
        out = np.ones_like(x)
    elif spec.family is Family.CHEBYSHEV:
        pm, p = np.ones_like(x), 1.0 - x
        for w in chebyshev_weights(k, b):
            pm, p = p, w * ((1.0 - x) * p - pm) + pm
        out = p
    elif spec.family is Family.HB:
        out = 1.0 - x * _hb_q(k - 1, b, x)
    else:
        L = b.lambda_max
        beta = na_parameter(b)
        pm, p = np.ones_like(x), 1.0 - x / L
        for _ in range(k - 1):
            pm, p = p, (1.0 + beta) * (1.0 - x / L) * p - beta * (1.0 - x / L) * pm
        out = p
    return float(out) if scalar else out


def q_eval(spec: PolynomialSpec, x):
    """Approximate inverse ``q_k`` (heavy ball and Nesterov only)."""
    x, scalar = _as_array(x)
    if spec.family is Family.HB:
        out = _hb_q(spec.k, spec.bounds, x)
    elif spec.family is Family.NA:
        out = _na_q(spec.k, spec.bounds, x)
    else:
        raise ValueError("q_eval supports the hb and na families")
    return float(out) if scalar else out


def curve_data(k: int, bounds: SpectralBounds, grid=None) -> dict[str, np.ndarray]:
    """Samples of ``p_k`` for every family defined on ``bounds``.

    Keys are ``"x"`` and ``"p_cheb"``, ``"p_hb"``, ``"p_na"``; the
    heavy-ball curve is omitted when ``lambda_min = 0``.
    """
    if grid is None:
        grid = np.linspace(0.0, bounds.lambda_max, 201)
    grid = np.asarray(grid, dtype=np.float64)
    out = {"x": grid}
    for fam in Family:
        if fam is Family.HB and bounds.lambda_min == 0:
            continue
        out[f"p_{fam.value}"] = p_eval(PolynomialSpec(fam, k, bounds), grid)
    return out


def curves_csv(ks, bounds: SpectralBounds, step: float = 0.005) -> str:
    """CSV with columns ``k,x,p_cheb,p_hb,p_na``; absent families are empty."""
    n = int(round(bounds.lambda_max / step)) + 1
    grid = np.linspace(0.0, bounds.lambda_max, n)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "x", "p_cheb", "p_hb", "p_na"])
    for k in ks:
        d = curve_data(k, bounds, grid)
        cols = [d.get(f"p_{f.value}") for f in Family]
        for i, xv in enumerate(grid):
            w.writerow([k, f"{xv:.6g}"] + ["" if c is None else f"{c[i]:.12g}" for c in cols])
    return buf.getvalue()


def hb_bound(kappa: float, k: int) -> float:
    """``((kappa-1)/2) ((sqrt(kappa)-1)/(sqrt(kappa)+1))^(k-1)``."""
    if kappa < 1:
        raise ValueError("condition number must be >= 1")
    if k < 1:
        raise ValueError("k must be >= 1")
    sk = math.sqrt(kappa)
    return 0.5 * (kappa - 1.0) * ((sk - 1.0) / (sk + 1.0)) ** (k - 1)


def na_bound(kappa: float, k: int) -> float:
    """``2 (1 - 1/sqrt(kappa))^k``; bounds the squared A-norm error ratio."""
    if kappa < 1:
        raise ValueError("condition number must be >= 1")
    if k < 1:
        raise ValueError("k must be >= 1")
    return 2.0 * (1.0 - 1.0 / math.sqrt(kappa)) ** k


# --- uniform-convergence thresholds -----------------------------------------


@dataclass(frozen=True)
class ThresholdResult:
    family: str
    k: int
    delta: float
    delta_TG: float
    delta_max: float
    residual: float


def threshold_function(family: str, k: int, delta):
    """``g(delta)`` such that the cycle is uniform when ``kappa_TG g(delta) <= 1``.

    Accepts complex ``delta`` (used for complex-step derivatives).
    """
    d = np.asarray(delta, dtype=complex if np.iscomplexobj(delta) else np.float64)
    s = np.sqrt(1.0 - d)
    if family == "H":
        lo, hi = (1.0 - s) ** (k - 1), (1.0 + s) ** (k - 1)
        return (1.0 - d) * (1.0 + d * lo / (2.0 * (1.0 - d) * hi - d * lo))
    if family == "N":
        w = np.sqrt(2.0 * (1.0 - s) ** k)
        return (1.0 - d) / (1.0 - w)
    raise ValueError(f"unknown family {family!r}; expected 'H' or 'N'")


def _admissible_max(family: str, k: int) -> float:
    """Supremum of admissible ``delta`` in ``[0, 1)``."""
    if family == "N":
        s = 1.0 - 2.0 ** (-1.0 / k)
        return 1.0 - s * s

    def D(d):
        s = math.sqrt(1.0 - d)
        return 2.0 * (1.0 - d) * (1.0 + s) ** (k - 1) - d * (1.0 - s) ** (k - 1)

    lo, hi = 0.0, 1.0  # D(0) > 0 > D(1)
    while hi - lo > 1e-15:
        mid = 0.5 * (lo + hi)
        if D(mid) > 0:
            lo = mid
        else:
            hi = mid
    return lo


def solve_threshold(family: str, k: int, tol: float = 1e-12) -> ThresholdResult:
    """Largest two-grid convergence factor ``delta_TG`` for which some
    admissible ``delta`` satisfies the uniformity inequality.

    Since the inequality reads ``1 - delta_TG >= g(delta)``, the answer is
    ``1 - min g`` over the admissible interval.  ``g`` decreases from
    ``g(0) = 1`` and blows up at the admissibility boundary; its minimizer
    is located by bisection on the sign of ``g'``, computed by complex step.
    """
    family = family.upper()
    if family not in ("H", "N"):
        raise ValueError(f"unknown family {family!r}; expected 'H' or 'N'")
    if k < 2:
        raise ValueError("thresholds need k >= 2")
    dmax = _admissible_max(family, k)
    h = 1e-30

    def slope(d):
        return threshold_function(family, k, complex(d, h)).imag / h

    lo, hi = 0.0, dmax * (1.0 - 1e-14)
    if slope(hi) <= 0:
        raise ValueError(f"no admissible minimizer for family {family}, k={k}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if slope(mid) < 0:
            lo = mid
        else:
            hi = mid
    delta = 0.5 * (lo + hi)
    g = float(threshold_function(family, k, delta))
    delta_tg = 1.0 - g
    if not 0.0 < delta_tg < 1.0:
        raise ValueError(f"no admissible delta for family {family}, k={k}")
    residual = abs(float(threshold_function(family, k, delta)) - (1.0 - delta_tg))
    return ThresholdResult(family, k, delta, delta_tg, dmax, residual)
