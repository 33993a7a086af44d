import numpy as np
import pytest

from evobic import ExpressionMatrix

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def gaussian_matrix():
    def make(rows=100, cols=20, seed=0):
        return ExpressionMatrix(np.random.default_rng(seed).standard_normal((rows, cols)))

    return make


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line for the end-of-run summary, then assert."""

    def record(tag: str, ok: bool, detail: str) -> None:
        ACCEPTANCE_LINES.append(f"{tag}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail

    return record
