"""Shared pytest plumbing: a summary table for the acceptance checks."""

_RECORDS = []


def record(number: int, label: str, ok: bool, detail: str = "") -> None:
    """Log one acceptance criterion outcome for the end-of-run summary."""
    _RECORDS.append((number, label, bool(ok), detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _RECORDS:
        return
    terminalreporter.section("acceptance summary")
    for number, label, ok, detail in sorted(_RECORDS):
        status = "PASS" if ok else "FAIL"
        line = f"criterion {number:2d} {status}  {label}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
