import pytest

_LINES = []


@pytest.fixture
def criterion():
    """record(number, ok, detail): print and remember one acceptance line."""
    def record(number, ok, detail=""):
        line = "criterion %2d: %s  %s" % (number, "PASS" if ok else "FAIL", detail)
        _LINES.append((number, line))
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_LINES):
        terminalreporter.write_line(line)
