import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def random_lottery(rng, n=None, lo=-5.0, hi=5.0):
    from dualrisk import build_lottery

    n = n or int(rng.integers(2, 21))
    x = rng.uniform(lo, hi, n)
    p = rng.dirichlet(np.ones(n))
    return build_lottery(list(zip(x, p)))


def random_spread(rng, n=None):
    """Zero-mean sub-probability risk with total mass in (0, 1)."""
    from dualrisk import build_spread_risk

    n = n or int(rng.integers(2, 21))
    mass = rng.uniform(0.05, 0.95)
    p = rng.dirichlet(np.ones(n)) * mass
    x = rng.uniform(-3.0, 3.0, n)
    x -= np.dot(p, x) / mass
    return build_spread_risk(list(zip(x, p)))


_ACCEPTANCE = {}


@pytest.fixture
def acceptance():
    """Record one acceptance line; printed in the terminal summary."""

    def record(label, title, ok, detail):
        _ACCEPTANCE[label] = (title, ok, detail)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_ACCEPTANCE, key=lambda s: (int(s.rstrip("b")), s)):
        title, ok, detail = _ACCEPTANCE[label]
        terminalreporter.write_line(f"criterion {label:>3}: {'PASS' if ok else 'FAIL'}  {title}  [{detail}]")
