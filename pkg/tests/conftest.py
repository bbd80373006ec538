import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def loop_row_norms(Y):
    out = []
    for row in Y:
        s = 0.0
        for v in row:
            s += v * v
        out.append(s**0.5)
    return out


_ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one acceptance line; printed again in the terminal summary."""

    def emit(number, title, passed, detail):
        line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {title}: {detail}"
        _ACCEPTANCE_LINES.append((number, line))
        print(line)
        return passed

    return emit


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
