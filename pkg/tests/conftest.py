"""Shared pytest wiring.

Tests marked @pytest.mark.acceptance(n) roll up into a criterion
summary table printed after the run, one PASS/FAIL line per criterion.
"""

import pytest

CRITERION_TITLES = {
    1: "guess-game simulation matches the independent comparator oracle",
    2: "wraparound arithmetic matches unbounded modular reference",
    3: "internet checksum matches the naive fold oracle; patched headers verify",
    4: "insert_agg grows payloads by 4 with consistent lengths and checksums",
    5: "generated files reproduce the golden tree byte-for-byte, twice",
    6: "emitted P4 is balanced and symbol-closed; empty program gates nothing",
    7: "equals hint changes the emitted code, never simulation results",
    8: "scope closers return their opener's parent; bad calls leave no trace",
    9: "overlapping selectors classify to the earlier registration",
    10: "CLI examples/check/generate/simulate round-trip against goldens",
}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(n): ties a test to acceptance criterion n"
    )
    config._acceptance_outcomes = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    n = marker.args[0]
    outcomes = item.config._acceptance_outcomes
    if report.when == "call" or report.failed:
        outcomes.setdefault(n, []).append(report.outcome)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcomes = getattr(config, "_acceptance_outcomes", {})
    if not outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(outcomes):
        seen = outcomes[n]
        if all(o == "passed" for o in seen):
            status = "PASS"
        elif any(o == "failed" for o in seen):
            status = "FAIL"
        else:
            status = "SKIP"
        terminalreporter.write_line(
            f"criterion {n:2d}: {status} - {CRITERION_TITLES.get(n, '')}"
        )
