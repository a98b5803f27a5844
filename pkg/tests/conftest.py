import numpy as np
import pytest

from fransonsim.analysis import FringeScan


def synthetic_scan(v, peak, rng=None, steps=181, cycles=1.5, phase0=0.0, drift=None, singles=50_000):
    """Cosine fringe with visibility ``v`` and mean maximum ``peak``.

    Without ``rng`` the counts are the rounded means; with it they are
    Poisson draws.
    """
    x = np.linspace(0.0, np.pi / 2, steps)
    phi = 2 * np.pi * cycles * np.arange(steps) / (steps - 1) + phase0
    if drift is not None:
        phi = phi + drift
    mean = peak / (1 + v) * (1 + v * np.cos(phi))
    counts = rng.poisson(mean) if rng is not None else np.rint(mean)
    s = np.full(steps, singles)
    return FringeScan(x, counts.astype(np.int64), s, s, 5.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE = {}


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion; printed at the end of the run."""
    def record(n, ok, detail):
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE[n] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[n])
