import pathlib

import pytest

FIXTURES = pathlib.Path(__file__).parent / "fixtures"

_CRITERIA = {}


class CriterionRecorder:
    """Collects one verdict line per acceptance criterion for the summary."""

    def __init__(self, number, title):
        self.number = number
        self.title = title
        self.details = []
        _CRITERIA[number] = ("FAIL", title, self.details)

    def note(self, text):
        self.details.append(text)

    def check(self, ok, text):
        self.note(("ok   " if ok else "FAIL ") + text)
        return ok

    def finish(self, ok):
        _CRITERIA[self.number] = ("PASS" if ok else "FAIL", self.title, self.details)
        line = f"criterion {self.number:2d} {'PASS' if ok else 'FAIL'}: {self.title}"
        print(line)
        for d in self.details:
            print("    " + d)
        assert ok, line + "\n" + "\n".join(self.details)


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def criterion():
    return CriterionRecorder


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        verdict, title, details = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d} {verdict}: {title}")
        for d in details:
            terminalreporter.write_line("    " + d)
