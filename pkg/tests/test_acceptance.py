"""Acceptance criteria 1-12 at their stated tolerances.

Each test records a one-line PASS/FAIL verdict that is printed in the pytest
terminal summary (and by ``python3 tests/test_acceptance.py``). Set
IRSNOMA_PROFILE=quick for a faster run with fewer MC trials.
"""
import os
import sys

import pytest

from irsnoma import acceptance

PROFILE = acceptance.get_profile(os.environ.get("IRSNOMA_PROFILE", "default"))
VERDICTS: dict[int, str] = {}


def _run(n):
    res = acceptance.CHECKS[n](PROFILE)
    VERDICTS[n] = res.line()
    print(res.line())
    return res


@pytest.mark.slow
@pytest.mark.parametrize("n", sorted(acceptance.CHECKS), ids=lambda n: f"criterion_{n:02d}")
def test_criterion(n):
    res = _run(n)
    assert res.passed, f"{res.line()}\n{res.details}"


if __name__ == "__main__":
    ok = True
    for n in sorted(acceptance.CHECKS):
        ok &= _run(n).passed
    sys.exit(0 if ok else 1)
