import re

import pytest

_acceptance_results: dict[int, list[tuple[str, bool]]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call" and item.module.__name__.endswith("test_acceptance"):
        m = re.match(r"test_c(\d+)", item.name)
        if m:
            _acceptance_results.setdefault(int(m.group(1)), []).append(
                (item.name, rep.passed))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.write_line("")
    terminalreporter.write_line("acceptance criteria")
    for num in sorted(_acceptance_results):
        entries = _acceptance_results[num]
        ok = all(passed for _, passed in entries)
        status = "PASS" if ok else "FAIL"
        detail = ""
        if not ok and len(entries) > 1:
            detail = "  [" + "; ".join(
                f"{name}: {'pass' if passed else 'FAIL'}" for name, passed in entries) + "]"
        terminalreporter.write_line(f"  criterion {num}: {status}{detail}")
