import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


_RESULTS: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion(request):
    """Record a one-line pass/fail summary for an acceptance criterion."""
    entry = {"label": request.node.name, "detail": ""}

    def note(label: str, detail: str = ""):
        entry["label"], entry["detail"] = label, detail

    yield note
    report = getattr(request.node, "rep_call", None)
    passed = bool(report and report.passed)
    _RESULTS.append((entry["label"], passed, entry["detail"]))


@pytest.hookimpl(hookwrapper=True, tryfirst=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in _RESULTS:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {label}  {detail}")
