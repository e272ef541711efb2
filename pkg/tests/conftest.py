"""Shared test plumbing: the acceptance criterion report."""

# Criterion pass/fail lines collected by tests/test_acceptance.py; printed
# in the terminal summary so they survive pytest's output capture.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
