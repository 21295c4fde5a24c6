from __future__ import annotations

import pytest

_ACCEPTANCE_FILE = "test_acceptance.py"


def _acceptance_name(nodeid: str) -> str | None:
    if _ACCEPTANCE_FILE not in nodeid:
        return None
    return nodeid.rsplit("::", 1)[-1]


@pytest.hookimpl(trylast=True)
def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcomes: dict[str, str] = {}
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, []):
            name = _acceptance_name(getattr(report, "nodeid", ""))
            if name is None:
                continue
            if getattr(report, "when", "call") != "call" and status == "passed":
                continue
            label = "PASS" if status == "passed" else "FAIL"
            # a failed setup/teardown still fails the criterion
            if name not in outcomes or label == "FAIL":
                outcomes[name] = label
    if not outcomes:
        return

    try:
        from test_acceptance import CRITERIA
    except ImportError:
        CRITERIA = {}

    terminalreporter.write_sep("=", "acceptance criteria")
    for name in CRITERIA or sorted(outcomes):
        if name not in outcomes:
            continue
        label = outcomes[name]
        description = CRITERIA.get(name, name)
        terminalreporter.write_line(f"[{label}] {description}")
