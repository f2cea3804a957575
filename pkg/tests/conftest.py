import numpy as np
import pytest

from quadwf.ensemble import EnsembleSpec, build_ensemble


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_problem():
    """x of length 4 and a 3-measurement Gaussian ensemble."""
    rng = np.random.default_rng(7)
    x = crandn(rng, 4)
    ens = build_ensemble(EnsembleSpec(4, 3, 0.0, 99), x)
    return x, ens


def make_problem(n, m, q=0.0, seed=0):
    rng = np.random.default_rng([seed, n, m])
    x = crandn(rng, n)
    return x, build_ensemble(EnsembleSpec(n, m, q, seed), x)


ACCEPTANCE_LINES = []


def report(number, name, passed, detail):
    """Record one acceptance line; printed in the terminal summary."""
    ACCEPTANCE_LINES.append((number, f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2} "
                                     f"{name}: {detail}"))
    print(ACCEPTANCE_LINES[-1][1])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
