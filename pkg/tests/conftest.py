"""Shared fixtures plus the end-of-run acceptance summary."""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from polykg import data  # noqa: E402
from polykg.ntriples import load_ntriples  # noqa: E402

_ACCEPTANCE: dict[str, dict] = {}


@pytest.fixture(scope="session")
def mini_kg_text() -> str:
    return data.read(data.MINI_KG)


@pytest.fixture()
def mini_kg(mini_kg_text):
    graph, docs, _ = load_ntriples(mini_kg_text)
    return graph, docs


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    criterion, title = marker.args
    entry = _ACCEPTANCE.setdefault(criterion, {"title": title, "passed": 0, "failed": 0})
    if report.when == "call":
        entry["passed" if report.passed else "failed"] += 1
    elif report.failed or report.skipped:
        entry["failed"] += 1


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(_ACCEPTANCE, key=lambda c: int(c[2:])):
        entry = _ACCEPTANCE[criterion]
        ok = entry["failed"] == 0 and entry["passed"] > 0
        terminalreporter.write_line(
            f"{criterion} {'PASS' if ok else 'FAIL'}  {entry['title']} "
            f"({entry['passed']} passed, {entry['failed']} failed)"
        )
