"""Collects acceptance outcomes and prints one line per criterion at the end."""

import re
from collections import defaultdict

import pytest

ACC_NAME = re.compile(r"test_acc(\d\d)_(\w+?)(?:\[|$)")

_outcomes: dict[int, list[bool]] = defaultdict(list)
_titles: dict[int, str] = {}
_notes: dict[int, list[str]] = defaultdict(list)


@pytest.fixture
def note(request):
    """Attach a detail string to the criterion of the running acceptance test."""
    m = ACC_NAME.search(request.node.name)

    def add(text: str) -> None:
        if m:
            _notes[int(m.group(1))].append(text)

    return add


def pytest_runtest_logreport(report):
    m = ACC_NAME.search(report.nodeid.split("::")[-1])
    if not m:
        return
    num = int(m.group(1))
    _titles.setdefault(num, m.group(2).replace("_", " "))
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _outcomes[num].append(report.outcome == "passed")


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_outcomes):
        status = "PASS" if all(_outcomes[num]) else "FAIL"
        detail = "; ".join(_notes[num])
        line = f"[{num:02d}] {status} {_titles[num]}"
        terminalreporter.write_line(line + (f" ({detail})" if detail else ""))
