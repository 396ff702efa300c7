import numpy as np
import pytest


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def herm(A):
    return (A + A.conj().T) / 2


def min_eig(A):
    return float(np.linalg.eigvalsh(herm(A))[0])


def bisect_lambda(A, M, hi=None, rel=1e-12, slack=1e-12):
    """Least lam with lam*M - A PSD, by bisection on plain eigenvalues.

    Deliberately avoids the pencil whitening used by the library.
    """
    scale = max(np.linalg.norm(A, 2), np.linalg.norm(M, 2), 1e-300)

    def ok(lam):
        return min_eig(lam * M - A) >= -slack * scale * max(1.0, lam)

    hi = 1.0 if hi is None else hi
    while not ok(hi):
        hi *= 2
        if hi > 1e15:
            return np.inf
    lo = 0.0
    if ok(lo):
        return 0.0
    while hi - lo > rel * hi:
        mid = (lo + hi) / 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def scan_m_max(A, M, grid=4000, top=None):
    """Largest m on a grid with A - mM PSD, refined by bisection."""
    scale = max(np.linalg.norm(A, 2), 1e-300)

    def ok(m):
        return min_eig(A - m * M) >= -1e-11 * scale

    top = top or 2.0 * scale / max(np.linalg.norm(M, 2), 1e-300) + 1.0
    ms = np.linspace(0, top, grid)
    good = [m for m in ms if ok(m)]
    lo = max(good) if good else 0.0
    hi = min([m for m in ms if m > lo] + [top * 2])
    for _ in range(80):
        mid = (lo + hi) / 2
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for num in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[num])
