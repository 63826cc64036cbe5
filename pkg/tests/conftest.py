import pytest

from prudent import builtin_theories, extract_roles, nspk_text, parse_narration


@pytest.fixture(scope="session")
def theories():
    return builtin_theories()


@pytest.fixture(scope="session")
def dy(theories):
    return theories["dolev_yao"]


@pytest.fixture(scope="session")
def nspk(theories):
    return parse_narration(nspk_text(), theories)


@pytest.fixture(scope="session")
def nspk_roles(nspk):
    return {str(r.name): r for r in extract_roles(nspk)}



_CRITERIA: dict[int, tuple[str, float, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when != "call":
        return
    detail = "; ".join(str(v) for k, v in report.user_properties if k == "detail")
    _CRITERIA[mark.args[0]] = ("PASS" if report.passed else "FAIL", report.duration, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        verdict, seconds, detail = _CRITERIA[n]
        line = "criterion %d: %s (%.1f s)" % (n, verdict, seconds)
        terminalreporter.write_line(line + (" - " + detail if detail else ""))
