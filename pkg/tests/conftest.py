import pytest

# (number, title, passed, detail) filled in by test_acceptance.py
VERDICTS: list[tuple[int, str, bool, str]] = []


@pytest.fixture
def verdict():
    def record(number: int, title: str, passed: bool, detail: str) -> None:
        VERDICTS.append((number, title, bool(passed), detail))
        print(f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail}")
        assert passed, detail
    return record


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(VERDICTS):
        terminalreporter.write_line(f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail}")
