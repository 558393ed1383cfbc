import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=200,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


# criterion number -> (passed, detail), filled by tests/test_acceptance.py
ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Recorder for one acceptance criterion: ``criterion(n, ok, detail)``."""
    seen = []

    def record(n, ok, detail):
        seen.append(n)
        ACCEPTANCE[n] = (bool(ok), detail)
        print(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")

    yield record
    rep = getattr(request.node, "rep_call", None)
    if rep is not None and rep.failed and not seen:
        ACCEPTANCE[request.node.name] = (False, "raised before reporting")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE, key=lambda k: (isinstance(k, str), k if isinstance(k, int) else 0, str(k))):
        ok, detail = ACCEPTANCE[n]
        label = f"criterion {n:2d}" if isinstance(n, int) else n
        terminalreporter.write_line(f"{label}: {'PASS' if ok else 'FAIL'}  {detail}")
