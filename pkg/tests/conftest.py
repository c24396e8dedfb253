import numpy as np
import pytest

from sparsepconf import LabeledDataset, PconfDataset


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_pconf(rng, n=30, d=8, scale=1.0):
    X = scale * rng.standard_normal((n, d))
    r = rng.uniform(0.05, 1.0, n)
    return PconfDataset(X, r)


def random_labeled(rng, n=30, d=8):
    X = rng.standard_normal((n, d))
    y = np.where(rng.random(n) < 0.5, 1.0, -1.0)
    return LabeledDataset(X, y)


_CRITERIA_KEY = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_CRITERIA_KEY] = {}


@pytest.fixture
def criterion(request):
    """Record one pass/fail line for an acceptance criterion and return it."""
    lines = request.config.stash[_CRITERIA_KEY]

    def record(number, title, ok, detail):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        lines[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_CRITERIA_KEY, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for number in sorted(lines):
            terminalreporter.write_line(lines[number])
