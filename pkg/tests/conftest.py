import sys

import pytest
from hypothesis import settings

from irsnoma.model import SystemParams, derive

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture(scope="session")
def p8():
    return SystemParams(K=8)


@pytest.fixture(scope="session")
def p10():
    return SystemParams(K=10)


@pytest.fixture(scope="session")
def c8(p8):
    return derive(p8)


@pytest.fixture(scope="session")
def c10(p10):
    return derive(p10)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    verdicts = getattr(mod, "VERDICTS", None)
    if verdicts:
        terminalreporter.section("acceptance criteria")
        for n in sorted(verdicts):
            terminalreporter.write_line(verdicts[n])
