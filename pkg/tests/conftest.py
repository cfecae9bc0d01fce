import csv
import os

import pytest

DATA = os.path.join(os.path.dirname(__file__), "data")


def load_lattice(name):
    with open(os.path.join(DATA, name), newline="") as fh:
        return [(float(r["nu"]), float(r["mu"]), float(r["z"]), float(r["value"]))
                for r in csv.DictReader(fh)]


def _store(config):
    if not hasattr(config, "_acceptance_lines"):
        config._acceptance_lines = []
    return config._acceptance_lines


@pytest.fixture
def acceptance(request):
    """record(number, ok, detail): log one criterion line and assert it."""
    lines = _store(request.config)

    def record(number, ok, detail):
        lines.append((number, "PASS" if ok else "FAIL", detail))
        assert ok, f"criterion {number}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for number, status, detail in sorted(lines, key=lambda x: str(x[0])):
        terminalreporter.write_line(f"[{status}] criterion {number}: {detail}")
