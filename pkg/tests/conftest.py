import re

import pytest

_ACCEPTANCE: dict[int, dict] = {}
_NAME = re.compile(r"test_criterion_(\d+)_(\w+)")


@pytest.fixture
def note(request):
    """Attach a one-line measurement to the acceptance summary."""

    def add(text: str) -> None:
        request.node.user_properties.append(("note", text))

    return add


def pytest_runtest_logreport(report):
    m = _NAME.search(report.nodeid)
    if not m or "test_acceptance" not in report.nodeid:
        return
    entry = _ACCEPTANCE.setdefault(
        int(m.group(1)), {"title": m.group(2).replace("_", " "), "outcome": "passed", "notes": []}
    )
    if report.failed:
        entry["outcome"] = "failed"
    elif report.skipped and entry["outcome"] == "passed":
        entry["outcome"] = "skipped"
    if report.when == "call":
        entry["notes"] = [v for k, v in report.user_properties if k == "note"]


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(_ACCEPTANCE):
        e = _ACCEPTANCE[num]
        label = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[e["outcome"]]
        line = f"criterion {num:2d} {label}  {e['title']}"
        if e["notes"]:
            line += "  | " + "; ".join(e["notes"])
        tr.write_line(line)
