import numpy as np
import pytest

from fracocp import ModelParams, ObjectiveWeights, TimeGrid

PAPER_PARAMS = dict(
    Lambda=0.271, beta1=0.00035, beta2=0.0004, mu=0.001, rho=0.0058,
    gamma=0.007, tau=0.002, d=0.00025, p=0.3,
)
PAPER_X0 = np.array([220.0, 100.0, 3.0, 0.0])
PAPER_ALPHAS = (0.75, 0.85, 0.95, 1.0)

_criterion_lines: list[str] = []


@pytest.fixture
def params():
    return ModelParams(**PAPER_PARAMS, alpha=1.0)


@pytest.fixture
def weights():
    return ObjectiveWeights()


@pytest.fixture
def paper_grid():
    return TimeGrid(100.0, 1000)


@pytest.fixture
def report_criterion():
    """Record one PASS/FAIL line per acceptance criterion for the terminal summary."""

    def record(number: int, title: str, ok: bool, detail: str = ""):
        status = "PASS" if ok else "FAIL"
        _criterion_lines.append(f"[{status}] criterion {number}: {title}" + (f" -- {detail}" if detail else ""))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _criterion_lines:
        terminalreporter.section("acceptance criteria")
        for line in _criterion_lines:
            terminalreporter.write_line(line)
