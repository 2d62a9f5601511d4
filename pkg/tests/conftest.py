import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("vexlap", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("vexlap")

UNIT = (0.0, 0.0, 1.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    """Print the acceptance verdicts collected by test_acceptance.py."""
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
