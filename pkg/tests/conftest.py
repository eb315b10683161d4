import math

import pytest

from royden_lab import annulus, validate_domain

SQRT_HALF = math.sqrt(0.5)

_acceptance_lines: list[str] = []


def record_acceptance(number: int, ok: bool, detail: str) -> None:
    line = f"ACCEPTANCE {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    _acceptance_lines.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_acceptance_lines):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def ann():
    """A(0.5, 1) with base point sqrt(0.5)."""
    return annulus(0.5, SQRT_HALF)


@pytest.fixture(scope="session")
def two_holes():
    return validate_domain(
        {
            "outer": {"center": [0, 0], "radius": 1},
            "holes": [{"center": ["0.4", 0], "radius": "0.15"}, {"center": ["-0.4", 0], "radius": "0.15"}],
            "base_point": [0, "0.1"],
        }
    )


@pytest.fixture
def acceptance():
    return record_acceptance
