import os
from contextlib import contextmanager

import pytest
from hypothesis import HealthCheck, settings

PROFILE = os.environ.get("MAGINT_HYPOTHESIS_PROFILE", "magint")

settings.register_profile(
    "magint",
    max_examples=1000,
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large, HealthCheck.filter_too_much],
)
settings.register_profile("quick", parent=settings.get_profile("magint"), max_examples=50)
settings.load_profile(PROFILE)

_ACCEPTANCE = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = {}


@pytest.fixture
def acceptance(request):
    """Context manager recording one PASS/FAIL line per acceptance criterion."""
    log = request.config.stash[_ACCEPTANCE]

    @contextmanager
    def record(number, title):
        notes = []
        try:
            yield notes
        except BaseException as exc:
            reason = str(exc).strip().splitlines()[0] if str(exc).strip() else type(exc).__name__
            log[number] = f"criterion {number:2d} FAIL  {title}: {reason}"
            print(log[number])
            raise
        detail = "; ".join(notes)
        log[number] = f"criterion {number:2d} PASS  {title}" + (f": {detail}" if detail else "")
        print(log[number])

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = config.stash.get(_ACCEPTANCE, {})
    if log:
        terminalreporter.section("acceptance criteria")
        for k in sorted(log):
            terminalreporter.write_line(log[k])
