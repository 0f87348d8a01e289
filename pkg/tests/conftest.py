import pytest

_acceptance_lines = []


@pytest.fixture(scope="session")
def acceptance_report():
    """Collect one verdict line per acceptance criterion.

    Lines are echoed in the terminal summary so they survive output capture.
    """
    def record(line: str) -> None:
        _acceptance_lines.append(line)
        print(line)
    return record


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.line(line)
