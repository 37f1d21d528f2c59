import pytest

from laacoex.model import ProtocolConfig, TrafficProfile

TABLE1_L1 = (0.03, 0.05, 0.08, 0.09, 0.11)
TABLE1_L2 = (0.05, 0.03, 0.05, 0.3, 0.02, 0.1)
LISTED_PATTERN = (0, 0, 1, 2, 1, 1)  # WiFi, WiFi, LAA, LTE, LAA, LAA
TABLE1_BETA = 1.618


@pytest.fixture
def cfg():
    return ProtocolConfig()


@pytest.fixture
def table1():
    return TrafficProfile(TABLE1_L1, TABLE1_L2)


_VERDICTS = []


@pytest.fixture
def verdict():
    """Record one acceptance line; the terminal summary prints them all."""

    def record(number, name, ok, detail=""):
        _VERDICTS.append((number, name, ok, detail))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, ok, detail in sorted(_VERDICTS, key=lambda v: v[0]):
        terminalreporter.write_line(f"[{number}] {'PASS' if ok else 'FAIL'} {name}: {detail}")
