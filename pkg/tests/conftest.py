import numpy as np
import pytest

# criterion id -> list of (label, passed, detail) filled by the acceptance suite
ACCEPTANCE = {}


def record(criterion, label, passed, detail=""):
    ACCEPTANCE.setdefault(criterion, []).append((label, bool(passed), detail))
    print(f"{'PASS' if passed else 'FAIL'}  criterion {criterion}: {label}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE, key=int):
        checks = ACCEPTANCE[crit]
        ok = all(p for _, p, _ in checks)
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {crit}")
        for label, p, detail in checks:
            tr.write_line(f"        {'ok  ' if p else 'FAIL'}  {label}  {detail}")
