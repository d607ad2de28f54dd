import pytest

ACCEPTANCE: dict[str, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    criterion = item.get_closest_marker("criterion")
    if criterion is None or rep.when != "call" and not rep.failed:
        return
    num, title = criterion.args
    prev = ACCEPTANCE.get(num, ("PASS", title))[0]
    status = "FAIL" if rep.failed or prev == "FAIL" else "PASS"
    ACCEPTANCE[num] = (status, title)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE, key=int):
        status, title = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:>2}: {status}  {title}")
