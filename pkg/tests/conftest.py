import numpy as np
import pytest

import staleopt as so

# Collected by the acceptance tests; printed as a summary table at the end.
ACCEPTANCE_RESULTS = []


def report_criterion(number, passed, detail):
    line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'} - {detail}"
    ACCEPTANCE_RESULTS.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_RESULTS):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(key=20240817))


@pytest.fixture
def ball2():
    return so.Ball(np.zeros(2), 1.0)


@pytest.fixture
def small_quadratic():
    dom = so.Ball(np.zeros(4), 1.0)
    return so.Quadratic(matrix=np.diag([1.0, 2.0, 3.0, 4.0]),
                        linear=np.array([0.5, 0.0, -0.25, 0.1]),
                        domain=dom)
