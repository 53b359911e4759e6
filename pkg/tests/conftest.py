"""Shared fixtures and helpers for the test suite."""

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mgcycles import ProblemSpec, SparseMatrix, assemble, build_hierarchy

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def random_spd(rng, n, cond=None):
    """Dense SPD matrix with eigenvalues in ``[1, cond]`` (log-uniform)."""
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    cond = cond if cond is not None else 10.0 ** rng.uniform(0.5, 3)
    eig = np.exp(rng.uniform(0.0, np.log(cond), n))
    eig[0], eig[-1] = 1.0, cond
    A = (Q * eig) @ Q.T
    return 0.5 * (A + A.T)


def dense_operator(apply, n):
    """Matrix of a linear map given as ``v -> apply(v)``."""
    out = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        out[:, j] = apply(e)
    return out


def exact_level_bounds(hierarchy, spec):
    """Per-level bounds equal to the exact extreme eigenvalues of ``B_l A_l``.

    Computed bottom-up by densifying the cycle on every coarse level.
    """
    from mgcycles import MultigridCycle, SpectralBounds

    J = hierarchy.n_levels
    bounds = [SpectralBounds()] * J
    bounds[J - 1] = SpectralBounds(1.0, 1.0)
    for level in range(J - 2, 0, -1):
        cycle = MultigridCycle(hierarchy, spec, bounds)
        Bm = dense_operator(lambda v: cycle.apply(v, level), hierarchy.dims()[level])
        lam = np.sort(np.linalg.eigvals(Bm @ hierarchy.A(level).toarray()).real)
        bounds[level] = SpectralBounds(lam[0], lam[-1])
    return bounds


def spectrum_BA(A, B):
    """Sorted eigenvalues of ``B A`` for SPD ``A`` and ``B``."""
    L = np.linalg.cholesky(A)
    return np.sort(np.linalg.eigvalsh(L.T @ B @ L))


def a_norm(A, e):
    return float(np.sqrt(e @ (A @ e)))


@pytest.fixture(scope="session")
def poisson8():
    return assemble(ProblemSpec("poisson", 8))


@pytest.fixture(scope="session")
def poisson8_hierarchy(poisson8):
    """Four-level hierarchy on the 49-unknown Poisson problem."""
    H = build_hierarchy(poisson8, coarsest_size=4)
    assert H.n_levels >= 3
    return H


@pytest.fixture(scope="session")
def poisson16_hierarchy():
    A = assemble(ProblemSpec("poisson", 16))
    return A, build_hierarchy(A, coarsest_size=10)


def tridiag(n, a=2.0, b=-1.0):
    main = np.full(n, a)
    off = np.full(n - 1, b)
    return SparseMatrix(np.diag(main) + np.diag(off, 1) + np.diag(off, -1), symmetric=True)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import VERDICTS

    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[n])
