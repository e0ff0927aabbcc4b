import os
import sys

import numpy as np
import pytest

# make the oracle module importable as a plain module
sys.path.insert(0, os.path.dirname(__file__))


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


FIG2_THETA = (0.15, 0.27, 0.08, 0.5)


def pytest_terminal_summary(terminalreporter):
    import acceptance_log
    if acceptance_log.RESULTS:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(acceptance_log.RESULTS):
            terminalreporter.write_line(line)
