import sys

import pytest

if hasattr(sys, "set_int_max_str_digits"):
    sys.set_int_max_str_digits(0)


def trial_valuation(n, p):
    """Oracle: strip factors of p one at a time."""
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def trial_is_prime(n):
    return n >= 2 and all(n % d for d in range(2, int(n**0.5) + 1))


@pytest.fixture(scope="session")
def shared_cache():
    from goebel.solver import RunCache

    return RunCache(audit_rate=0.01, seed=1234)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for an acceptance criterion."""

    def report(label, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
