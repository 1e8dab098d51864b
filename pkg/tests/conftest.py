import pytest

_LINES = []


class Recorder:
    def __init__(self, sink):
        self.sink = sink

    def __call__(self, label, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}" + (f" :: {detail}" if detail else "")
        self.sink.append(line)
        print(line)
        return ok


@pytest.fixture
def record():
    return Recorder(_LINES)


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
