import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qrzero.simstudy import SimSpec, generate  # noqa: E402
from qrzero.stochastic import make_rng  # noqa: E402

ACCEPTANCE_LINES = []


@pytest.fixture
def record_criterion():
    def record(name, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {name}" + (f": {detail}" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def sim_data():
    """A default-design simulated dataset at n=200 with its true censoring labels."""
    return generate(SimSpec(n=200), make_rng(2024, 0))


@pytest.fixture
def small_xz():
    rng = np.random.default_rng(0)
    n = 30
    X = np.column_stack([np.ones(n), rng.uniform(0, 1, n)])
    return X, X.copy()
