import numpy as np
import pytest

from levy_sieve.model import ReferenceMeasure, constant


@pytest.fixture
def unit():
    return ReferenceMeasure.lebesgue(0.0, 1.0)


@pytest.fixture
def const10():
    return constant(10.0)


def within_se(mean, target, se, k=3.0):
    return np.all(np.abs(np.asarray(mean) - target) <= k * np.asarray(se))


ACCEPTANCE_LINES: list[str] = []


def record(number: int, name: str, ok: bool, detail: str) -> bool:
    """Print and remember one acceptance line; returns ``ok`` for asserting."""
    line = f"ACCEPTANCE {number} [{'PASS' if ok else 'FAIL'}] {name}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
