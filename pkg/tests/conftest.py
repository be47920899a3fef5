import pytest
from mpmath import mp


@pytest.fixture(autouse=True)
def prec256():
    # comparisons in the tests run at the package default precision
    with mp.workprec(256):
        yield


def close(a, b, tol):
    a, b = mp.mpf(a), mp.mpf(b)
    return abs(a - b) <= mp.mpf(tol) * max(abs(a), abs(b), 1)


# one line per acceptance criterion, filled in by test_acceptance
CRITERIA: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERIA, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
