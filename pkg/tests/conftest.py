import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def flip_ordering(m):
    """Independent re-implementation of the |11>-first <-> |00>-first permutation."""
    p = np.zeros((4, 4))
    for i in range(4):
        p[i, 3 - i] = 1.0
    return p @ np.asarray(m) @ p.T


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {title} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
