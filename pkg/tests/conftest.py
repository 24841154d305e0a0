import pytest

_RESULTS: list[tuple[str, bool, str]] = []


class AcceptanceLog:
    def record(self, label: str, passed: bool, detail: str = ""):
        _RESULTS.append((label, bool(passed), detail))
        return passed


@pytest.fixture
def acceptance():
    return AcceptanceLog()


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in _RESULTS:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {label}  {detail}")
