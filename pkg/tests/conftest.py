import pytest

CRITERIA = []


@pytest.fixture
def criterion():
    """Record a named acceptance result; the summary prints one line each."""

    def record(name, passed, detail=""):
        CRITERIA.append((name, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in CRITERIA:
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"{status}  {name}  {detail}".rstrip())
