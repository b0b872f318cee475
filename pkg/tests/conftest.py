import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def logistic_map(n, x0=0.4):
    x = np.empty(n)
    x[0] = x0
    for i in range(1, n):
        x[i] = 4.0 * x[i - 1] * (1.0 - x[i - 1])
    return x


def henon_x(n, burn=100):
    h = np.zeros((n + burn, 2))
    for i in range(1, n + burn):
        h[i] = [1.0 - 1.4 * h[i - 1, 0] ** 2 + h[i - 1, 1], 0.3 * h[i - 1, 0]]
    return h[burn:, 0]


@pytest.fixture(scope="session")
def bundled_frame():
    from hybridfx.cli import DEFAULT_DATA
    from hybridfx.series_store import load_csv
    return load_csv(DEFAULT_DATA)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(mod.RESULTS):
        label, status = mod.RESULTS[num]
        terminalreporter.write_line(f"criterion {num:2d}: {status}  {label}")
