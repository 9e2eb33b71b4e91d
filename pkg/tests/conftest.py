import re

from acceptance_log import LINES


def _order(line):
    n, suffix = re.match(r"criterion\s+(\d+)(\w*)", line).groups()
    return int(n), suffix


def pytest_terminal_summary(terminalreporter):
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(LINES, key=_order):
            terminalreporter.write_line(line)
