import pytest

_RESULTS = {}


@pytest.fixture
def criterion(request):
    """Record one pass/fail line per acceptance criterion."""
    def record(number, title):
        _RESULTS[number] = (title, request.node)
        return number
    return record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        for number, (title, node) in list(_RESULTS.items()):
            if node is item:
                detail = ""
                if rep.failed and call.excinfo is not None:
                    detail = " :: " + str(call.excinfo.value).splitlines()[0][:160]
                _RESULTS[number] = (title, "PASS" if rep.passed else "FAIL" + detail)


def pytest_terminal_summary(terminalreporter):
    done = {k: v for k, v in _RESULTS.items() if isinstance(v[1], str)}
    if not done:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(done):
        title, status = done[number]
        terminalreporter.write_line(f"criterion {number:>2}: {status.split(' ::')[0]:4}  {title}"
                                    + (status[4:] if status.startswith("FAIL") else ""))
