import os
import sys
from fractions import Fraction

from hypothesis import HealthCheck, settings, strategies as st

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default",
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

PRIMES = (2, 3, 5, 7)


def p_integral(p, max_num=60, max_den=30):
    """Rationals whose denominator is prime to p."""
    return st.builds(Fraction, st.integers(-max_num, max_num),
                     st.integers(1, max_den).filter(lambda d: d % p != 0))


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
