def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    lines = test_acceptance.report_lines()
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)
