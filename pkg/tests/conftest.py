"""Shared test plumbing.

The acceptance tests in test_acceptance.py register a one-line verdict per
criterion through record_criterion(); the terminal-summary hook prints them
in a dedicated section so a full run always ends with the scoreboard, pass
or fail.
"""

from __future__ import annotations

CRITERION_LINES: list[tuple[float, str]] = []


def record_criterion(num: float, ok: bool, detail: str = "") -> bool:
    verdict = "PASS" if ok else "FAIL"
    CRITERION_LINES.append((num, f"criterion {num:>4}: {verdict}  {detail}".rstrip()))
    return ok


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not CRITERION_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(CRITERION_LINES):
        terminalreporter.write_line(line)
