import sys

import pytest

from mtqsim.calibration import uniform_snapshot
from mtqsim.topology import hanoi27


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    # acceptance verdict lines are echoed after capture so they always appear
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None) if mod else None
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def hanoi():
    return hanoi27()


@pytest.fixture(scope="session")
def flat_snap(hanoi):
    # the snapshot every directional experiment starts from
    return uniform_snapshot(hanoi, 0.02, 0.02)
