import pytest

_VERDICTS = []


@pytest.fixture
def verdict():
    """Record a PASS/FAIL line for an acceptance criterion, then assert it."""

    def record(number: int, ok: bool, detail: str) -> None:
        line = f"CRITERION {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        _VERDICTS.append(line)
        print(line)
        assert ok, line

    def skip(number: int, reason: str) -> None:
        _VERDICTS.append(f"CRITERION {number}: SKIPPED - {reason}")
        pytest.skip(reason)

    record.skip = skip
    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_VERDICTS, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
