import numpy as np
import pytest

from plctdr.pulses import PulseSpec


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=["hs-ofdm", "uwb1", "uwb2", "css"])
def family_spec(request):
    """One representative pulse per family at B = 1 MHz."""
    from plctdr.pulses import duration_for_bandwidth
    return duration_for_bandwidth(request.param, 1e6, n=64)


# one summary line per acceptance criterion, filled by tests/test_acceptance.py
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
