import pytest

_ACCEPTANCE: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    ok = report.outcome == "passed"
    prev = _ACCEPTANCE.get(crit, "PASS")
    _ACCEPTANCE[crit] = "PASS" if ok and prev == "PASS" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_ACCEPTANCE, key=lambda c: int(c)):
        terminalreporter.write_line(f"criterion {crit}: {_ACCEPTANCE[crit]}")


@pytest.fixture
def criterion(record_property):
    """Tag a test with the acceptance criterion it decides."""

    def tag(number: int):
        record_property("criterion", str(number))

    return tag
