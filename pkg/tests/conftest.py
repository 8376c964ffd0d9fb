import pytest

_criteria: dict[int, list[tuple[str, bool]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number checked by the test")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    for kw in report.keywords:
        if kw.startswith("criterion_"):
            _criteria.setdefault(int(kw.split("_")[1]), []).append((report.nodeid, report.passed))


@pytest.hookimpl(tryfirst=True)
def pytest_collection_modifyitems(items):
    # expose the criterion number as a plain keyword so the report hook can see it
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            item.keywords[f"criterion_{m.args[0]}"] = True


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_criteria):
        parts = _criteria[n]
        ok = all(p for _, p in parts)
        failed = [nid.split("::")[-1] for nid, p in parts if not p]
        line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'} ({len(parts) - len(failed)}/{len(parts)} checks)"
        if failed:
            line += " failing: " + ", ".join(failed)
        tr.write_line(line)
