import pytest

_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LINES] = []


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line for an acceptance criterion, then assert it."""
    lines = request.config.stash[_LINES]

    def record(number, title, ok, detail=""):
        status = "PASS" if ok else "FAIL"
        lines.append((number, f"[{status}] criterion {number:>2}: {title} | {detail}"))
        assert ok, f"criterion {number} failed: {detail}"

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(lines, key=lambda x: x[0]):
        terminalreporter.write_line(line)
