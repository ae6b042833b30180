import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


def random_mask(rng, max_side=64, density=None):
    h, w = rng.integers(1, max_side + 1, size=2)
    if density is None:
        density = rng.uniform(0.15, 0.85)
    return (rng.random((h, w)) < density).astype(np.uint8)


@pytest.fixture
def ring():
    m = np.ones((3, 3), dtype=np.uint8)
    m[1, 1] = 0
    return m


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for line in sorted(results):
            terminalreporter.write_line(line)
