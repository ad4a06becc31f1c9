import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from floquet_thermometry import Oscillator, nfbs_limit  # noqa: E402


@pytest.fixture(scope="session")
def flat():
    # plateau G0 ~ 1e-9 on [1e-5, 100]
    return nfbs_limit(1e-7, 100.0, 1e-11)


@pytest.fixture(scope="session")
def osc():
    return Oscillator()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
