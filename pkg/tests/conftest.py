"""Pytest hooks: print one summary line per acceptance criterion."""

import re

CRITERIA = {
    1: "optimal transport: LP vs closed form, metric axioms, plan marginals",
    2: "barycenter LP optimality on the 3-bin simplex grid",
    3: "Wasserstein k-means: monotone objective, two-group recovery",
    4: "GP interpolation, training-point deviation, PSD kernels",
    5: "Pareto front vs brute force, zero-distance iff nondominated, H/SD match",
    6: "pipeline: 51 records per session, ACR identity, runtime budget",
    7: "external study dataset ordinal checks",
    8: "decision tree: separable data, pruning, regenerated-dataset validation",
    9: "game service: concurrency, restart replay, stored-score recomputation",
    10: "game UI end to end (secondary component)",
}

_PATTERN = re.compile(r"test_criterion_(\d+)")
_RESULTS: dict[int, tuple[str, str]] = {}


def _skip_reason(report) -> str:
    text = str(report.longrepr)
    if isinstance(report.longrepr, tuple):
        text = report.longrepr[2]
    return text.split("Skipped: ", 1)[-1].strip()


def pytest_runtest_logreport(report):
    m = _PATTERN.search(report.nodeid)
    if not m:
        return
    number = int(m.group(1))
    if report.skipped:
        _RESULTS[number] = ("SKIP", _skip_reason(report))
    elif report.when == "call":
        _RESULTS[number] = ("PASS" if report.passed else "FAIL", "")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        outcome, note = _RESULTS[number]
        label = CRITERIA.get(number, "")
        line = f"criterion {number:>2} ({label}): {outcome}"
        if note:
            line += f" - {note}"
        terminalreporter.write_line(line)
