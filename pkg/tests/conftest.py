from __future__ import annotations

from collections import defaultdict

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

CRITERIA = {
    1: "spectrum DP equals brute-force enumeration",
    2: "exact diagonalization matches motif tables",
    3: "closed-form moments equal table moments",
    4: "critical-point residual and coupling sum identities",
    5: "prepotential identity, unique maximum, no critical point below threshold",
    6: "freezing-trick ratio converges like 1/a",
    7: "Dunkl operator triangularity in exact arithmetic",
    8: "ferro/antiferro duality",
    9: "level statistics at N = 20, 24",
    10: "parity and lattice invariants",
}

_outcomes: dict[int, list[tuple[str, str]]] = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number exercised by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.skipped:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        _outcomes[marker.args[0]].append((item.name, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        results = _outcomes.get(n)
        if not results:
            continue
        failed = [name for name, outcome in results if outcome != "passed"]
        status = "PASS" if not failed else "FAIL"
        line = f"criterion {n:2d} {status}  {CRITERIA[n]} ({len(results) - len(failed)}/{len(results)} checks)"
        if failed:
            line += "  failing: " + ", ".join(failed)
        terminalreporter.write_line(line)
