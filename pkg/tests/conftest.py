import pytest

_LINES: list[str] = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line for an acceptance criterion."""

    def emit(number: int, title: str, passed, detail: str):
        status = "SKIP" if passed is None else "PASS" if passed else "FAIL"
        line = f"criterion {number} {status}: {title} ({detail})"
        _LINES.append(line)
        print(line)
        return passed

    return emit


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
