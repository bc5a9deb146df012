import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = dict(report.user_properties).get("detail", "")
        _ACCEPTANCE[report.nodeid] = ("PASS" if report.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    import test_acceptance

    terminalreporter.section("acceptance criteria")
    for fn in test_acceptance.CRITERIA:
        key = next((k for k in _ACCEPTANCE if k.endswith("::" + fn.__name__)), None)
        if key is None:
            continue
        status, detail = _ACCEPTANCE[key]
        num = int(fn.__name__.split("_")[2])
        summary = " ".join(fn.__doc__.split())
        terminalreporter.write_line(f"{status}  criterion {num:2d}  {summary}" + (f"  [{detail}]" if detail else ""))
