import sys


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    report = getattr(mod, "REPORT", None)
    if not report:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(report):
        ok, detail = report[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} | {detail}")
