import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

import _acceptance_log


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = _acceptance_log.RESULTS
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for name, (passed, detail) in results.items():
        status = "SKIP" if passed is None else ("PASS" if passed else "FAIL")
        suffix = f"  ({detail})" if detail else ""
        terminalreporter.write_line(f"{status}  {name}{suffix}")
