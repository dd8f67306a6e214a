import pytest

_ACCEPTANCE = []


@pytest.fixture
def record_criterion():
    """Register a criterion outcome line for the terminal summary."""

    def record(number, name, passed, detail=""):
        _ACCEPTANCE.append((number, name, passed, detail))

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, passed, detail in sorted(_ACCEPTANCE):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number}: {name}  {detail}")
