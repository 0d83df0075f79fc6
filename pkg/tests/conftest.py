"""Shared fixtures and helpers for the test suite."""

import numpy as np
import pytest

from nsparam.cli_io import load_fixture
from nsparam.models import synthesize


def match_by(items, targets, key):
    """Pair each target with the nearest item under ``key`` (greedy, one-to-one)."""
    pool = list(items)
    out = []
    for t in targets:
        best = min(pool, key=lambda c: abs(key(c) - key(t)))
        pool.remove(best)
        out.append(best)
    return out


def phase_diff(a, b):
    return abs(np.angle(np.exp(1j * (a - b))))


@pytest.fixture(scope="session")
def transient():
    return load_fixture("transient")


@pytest.fixture(scope="session")
def vowel():
    return load_fixture("vowel")


@pytest.fixture(scope="session")
def fricative():
    return load_fixture("fricative")


@pytest.fixture(scope="session")
def ecg():
    return load_fixture("ecg")


@pytest.fixture(scope="session")
def ecg_signal(ecg):
    return synthesize(ecg, 498, 249)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, printed after the test session
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
