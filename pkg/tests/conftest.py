import pytest

_CRITERIA: dict[str, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(cid, title): acceptance criterion reported in the summary")


@pytest.fixture
def record(request):
    """Attach measured values to the current test for the acceptance summary."""
    def _record(**kw):
        request.node.user_properties.extend(kw.items())
    return _record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    cid, title = mark.args
    _CRITERIA[cid] = {
        "title": title,
        "passed": rep.passed,
        "detail": ", ".join(f"{k}={_short(v)}" for k, v in item.user_properties),
    }


def _short(v):
    if isinstance(v, float):
        return f"{v:.4g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_short(x) for x in v) + "]"
    return str(v)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid in sorted(_CRITERIA, key=lambda c: int(c[1:])):
        c = _CRITERIA[cid]
        status = "PASS" if c["passed"] else "FAIL"
        tr.write_line(f"{cid:>4} {status}  {c['title']}  ({c['detail']})")
