import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "repo",
    deadline=None,
    derandomize=True,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_diagonalizable(rng, n, lo=-1.0, hi=1.0, cond=3.0):
    """``S diag(lam) S^{-1}`` with prescribed real spectrum and a mild similarity."""
    lam = np.sort(rng.uniform(lo, hi, n))
    S = np.eye(n) + (cond - 1) / (2 * np.sqrt(n)) * rng.standard_normal((n, n))
    return S @ np.diag(lam) @ np.linalg.inv(S), lam


def separated_spectrum(rng, n, lo, hi, gap):
    """``n`` sorted points in ``[lo, hi]`` with pairwise distance at least ``gap``."""
    slack = (hi - lo) - gap * (n - 1)
    assert slack > 0
    cuts = np.sort(rng.uniform(0, slack, n))
    return lo + cuts + gap * np.arange(n)


def assembled_difference(small, big):
    """``||U_b X_b V_b^T - U_s X_s V_s^T||_F`` assembled in extended precision.

    Forming both products in double precision loses about ``eps * ||X||``
    to cancellation; extended precision keeps the reference accurate to a
    few units of double-precision roundoff relative to the difference.
    """
    wide = np.clongdouble if np.iscomplexobj(big.X) or np.iscomplexobj(big.U) else np.longdouble

    def product(r):
        return r.U.astype(wide) @ r.X.astype(wide) @ r.V.T.astype(wide)

    diff = product(big) - product(small)
    return float(np.sqrt(np.sum(np.abs(diff) ** 2)))


# acceptance reporting: one PASS/FAIL line per criterion after the run
_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion covered by the test")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call" or item.get_closest_marker("xfail"):
        return
    n = marker.args[0]
    ok = call.excinfo is None
    prev = _CRITERIA.get(n, (True, []))
    _CRITERIA[n] = (prev[0] and ok, prev[1] + [item.name])


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, names = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} ({', '.join(names)})")
