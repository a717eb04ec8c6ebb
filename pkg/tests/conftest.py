import itertools
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"


def naive_matmul(a, b):
    """Triple loop over basic operations; the oracle every fast path is checked against."""
    nx, nz = a.shape
    ny = b.shape[1]
    out = np.zeros((nx, ny))
    for i, k, j in itertools.product(range(nx), range(nz), range(ny)):
        out[i, j] += a[i, k] * b[k, j]
    return out


def rel_err(got, want):
    denom = np.linalg.norm(want)
    return float(np.linalg.norm(got - want) / (denom if denom else 1.0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import REPORT

    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in sorted(REPORT, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
