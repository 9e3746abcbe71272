"""Collects ``@pytest.mark.acceptance`` outcomes and prints one line per criterion."""
import pytest

_RESULTS = pytest.StashKey[dict]()


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title, tol): acceptance criterion check")
    config.stash[_RESULTS] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or (rep.when != "call" and rep.passed):
        return
    number, title, tol = marker.args
    entry = item.config.stash[_RESULTS].setdefault(number, {"title": title, "tol": tol, "ok": True, "worst": []})
    entry["ok"] = entry["ok"] and rep.passed
    entry["worst"].extend(v for k, v in item.user_properties if k == "worst")


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash[_RESULTS]
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        r = results[number]
        worst = f", worst {max(r['worst']):.2e}" if r["worst"] else ""
        status = "PASS" if r["ok"] else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {status}  {r['title']} (tol {r['tol']}{worst})")
