import pytest

_VERDICTS = {}


@pytest.fixture
def criterion():
    """``criterion(k, name, ok, detail)`` records a verdict line for the summary and asserts ``ok``."""
    def check(k, name, ok, detail=""):
        _VERDICTS[k] = (name, bool(ok), detail)
        assert ok, f"criterion {k} ({name}) failed: {detail}"
    return check


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_VERDICTS):
        name, ok, detail = _VERDICTS[k]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {k:>2}. {name}: {detail}")
