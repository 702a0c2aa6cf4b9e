def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, elapsed, why in sorted(RESULTS):
        status = "PASS" if passed else "FAIL"
        line = f"[{status}] {number:2d}. {title} ({elapsed:.2f}s)"
        terminalreporter.write_line(line + (f": {why}" if why else ""))
