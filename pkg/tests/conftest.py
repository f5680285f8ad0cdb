import numpy as np
import pytest

from irs_tdma import kernels

BACKENDS = kernels.available_backends()
_CRITERIA = []


@pytest.fixture(params=sorted(BACKENDS))
def backend(request):
    return BACKENDS[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def criterion():
    """Record one acceptance line; the test still asserts on its own."""

    def record(name, passed, detail=""):
        _CRITERIA.append((name, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _CRITERIA:
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")

