import sys


def pytest_terminal_summary(terminalreporter):
    module = next((m for name, m in sys.modules.items()
                   if name.endswith("test_acceptance") and hasattr(m, "REPORT")), None)
    if module is None or not module.REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(module.REPORT, key=lambda s: s.split()[1]):
        terminalreporter.write_line(line)
