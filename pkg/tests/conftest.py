import pytest

_REPORT = {}


@pytest.fixture(scope="session")
def report():
    """Record one verdict line per acceptance criterion."""
    def record(cid, passed, detail):
        _REPORT[cid] = (bool(passed), detail)
        print(f"{cid} {'PASS' if passed else 'FAIL'}: {detail}")
    return record


def _order(cid):
    return int(cid.lstrip("C"))


def pytest_terminal_summary(terminalreporter):
    if not _REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_REPORT, key=_order):
        ok, detail = _REPORT[cid]
        terminalreporter.write_line(f"{cid} {'PASS' if ok else 'FAIL'}: {detail}")
