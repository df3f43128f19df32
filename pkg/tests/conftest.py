def pytest_terminal_summary(terminalreporter):
    """Print the acceptance verdicts collected through record_property."""
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            if getattr(rep, "when", None) != "call" or "test_acceptance" not in rep.nodeid:
                continue
            found = [v for k, v in rep.user_properties if k == "acceptance"]
            lines.extend(found or [f"FAIL  {rep.nodeid.split('::')[-1]}: raised before a verdict"])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: s.split()[1]):
            terminalreporter.write_line(line)
