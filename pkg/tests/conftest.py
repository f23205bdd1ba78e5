import pytest

VERDICTS: list = []


@pytest.fixture
def verdict():
    """Record one ``[PASS]``/``[FAIL]`` line; returns the pass flag."""
    def emit(k: int, ok: bool, detail: str) -> bool:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {k}: {detail}"
        VERDICTS.append(line)
        print(line)
        return ok
    return emit


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(VERDICTS, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
