import pytest

from fictdom.analysis import run_convergence_study
from fictdom.problems import ProblemSpec

PAPER_LEVELS = (8, 16, 32, 64, 128)

_ACCEPTANCE_LINES: list[str] = []


def record_criterion(name: str, passed: bool, detail: str) -> None:
    _ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")


@pytest.fixture(scope="session")
def paper_study():
    return run_convergence_study(ProblemSpec(a=0.5, c_s=0.1, multiplier_space="fine"), PAPER_LEVELS)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
