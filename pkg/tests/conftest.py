import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

# (criterion id, title, budget seconds, outcome, duration, detail)
_ACCEPTANCE: dict[str, list] = {}
_SETUP: dict[str, float] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    if rep.when == "setup":
        # module fixtures do the heavy lifting for some criteria; charge them too
        _SETUP[item.nodeid] = rep.duration
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        crit, title, budget = mark.args
        detail = "; ".join(f"{k}={v}" for k, v in item.user_properties)
        if rep.failed and not detail:
            detail = str(rep.longrepr.reprcrash.message if hasattr(rep.longrepr, "reprcrash") else rep.longrepr)
        _ACCEPTANCE[item.nodeid] = [crit, title, budget, rep.outcome, rep.duration + _SETUP.get(item.nodeid, 0.0), detail]


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit, title, budget, outcome, dur, detail in sorted(_ACCEPTANCE.values(), key=lambda r: _order(r[0])):
        ok = outcome == "passed" and dur <= budget
        status = "PASS" if ok else "FAIL"
        slow = "" if dur <= budget else f" over budget {budget:g}s"
        line = f"{crit:<7} {status}  {title} ({dur:.2f}s{slow})"
        if detail:
            line += f"  [{detail.splitlines()[0][:200]}]"
        tr.write_line(line)


def _order(crit: str):
    digits = "".join(ch for ch in crit if ch.isdigit())
    return int(digits or 0), crit
