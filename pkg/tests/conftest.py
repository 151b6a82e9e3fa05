import numpy as np
import pytest

_ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line; the summary is printed at the end of the run."""
    name = request.node.name
    _ACCEPTANCE[name] = {"detail": "", "status": "FAIL"}

    def note(detail):
        _ACCEPTANCE[name]["detail"] = detail

    yield note


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if item.name in _ACCEPTANCE and rep.when in ("setup", "call"):
        if rep.skipped:
            _ACCEPTANCE[item.name]["status"] = "NOT RUN"
            _ACCEPTANCE[item.name]["detail"] = str(rep.longrepr[-1]) if isinstance(rep.longrepr, tuple) else ""
        elif rep.when == "call":
            _ACCEPTANCE[item.name]["status"] = "PASS" if rep.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, res in _ACCEPTANCE.items():
        line = f"{res['status']:8s} {name}"
        if res["detail"]:
            line += f"  -- {res['detail']}"
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
