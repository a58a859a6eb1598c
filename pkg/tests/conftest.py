import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from tabudyn.instance import Instance
from tabudyn.schedule import Orientation

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


# 2 jobs x 2 machines: job 0 runs M0 (3) then M1 (2), job 1 runs M1 (2) then M0 (4).
T1 = Instance(2, 2, ((0, 1), (1, 0)), ((3, 2), (2, 4)), name="T1")
S_A = Orientation(np.array([[0, 1], [1, 0]]))
S_B = Orientation(np.array([[0, 1], [0, 1]]))
S_C = Orientation(np.array([[1, 0], [1, 0]]))
S_D = Orientation(np.array([[1, 0], [0, 1]]))


@pytest.fixture
def t1():
    return T1


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(lines):
        terminalreporter.write_line(lines[k])
