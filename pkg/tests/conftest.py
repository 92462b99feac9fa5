import pytest

from colorvibe.search import VibrationGrid

_CRITERIA: dict[str, str] = {}


@pytest.fixture
def record_criterion():
    """Record one pass/fail line per acceptance criterion for the terminal summary."""

    def record(key: str, passed: bool, detail: str) -> None:
        _CRITERIA[key] = f"{'PASS' if passed else 'FAIL'}  {key}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA):
        terminalreporter.write_line(_CRITERIA[key])


@pytest.fixture(scope="session")
def coarse_grid():
    """Radius 2..100 step 7, angle step 10 degrees: 15 x 36 candidates."""
    return VibrationGrid.from_ranges(2, 100, 7, 0, 360, 10)
