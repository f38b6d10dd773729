import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    """Record a criterion's PASS/FAIL line for the end-of-run summary."""
    def emit(n: int, line: str) -> None:
        text = f"[{n}] {line}"
        ACCEPTANCE_LINES.append(text)
        print(text)
    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s[1:s.index("]")])):
            terminalreporter.write_line(line)
