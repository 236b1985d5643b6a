"""Shared fixtures: acceptance-criterion result collection and reporting."""

import pytest

_RESULTS = []


@pytest.fixture
def record_criterion():
    """Record one acceptance-criterion outcome for the terminal summary."""

    def rec(number: int, description: str, ok: bool, detail: str = ""):
        _RESULTS.append((number, description, bool(ok), detail))

    return rec


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number, description, ok, detail in sorted(_RESULTS):
        line = f"CRITERION {number:2d} {'PASS' if ok else 'FAIL'} — {description}"
        if detail:
            line += f" [{detail}]"
        terminalreporter.write_line(line)
