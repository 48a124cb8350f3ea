"""Shared fixtures and the acceptance-criterion summary hook."""

import datetime as dt

import pytest

from eldiff.corpus import Corpus, Document


@pytest.fixture
def tiny_corpus() -> Corpus:
    return Corpus([
        Document("d1", dt.date(2000, 5, 1), "SPORTS", "Paris won the match. The team left Paris!"),
        Document("d2", dt.date(2000, 11, 20), "POLITICS", "A vote in Paris; the senate met."),
        Document("d3", dt.date(2003, 2, 2), "", "No marks at all in this one"),
    ])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion."""
    lines = []
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, []):
            name = getattr(report, "nodeid", "")
            if "test_acceptance.py" not in name:
                continue
            short = name.split("::")[-1]
            lines.append((short, "PASS" if status == "passed" else "FAIL"))
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for short, verdict in sorted(lines):
            terminalreporter.write_line(f"{verdict}  {short}")
