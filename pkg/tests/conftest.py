import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], max_examples=60
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def low_rank(rng, n, d, r, scale=1.0):
    return scale * rng.standard_normal((n, r)) @ rng.standard_normal((r, d))


@pytest.fixture
def record(request):
    """Collect one PASS/FAIL line per acceptance criterion for the summary."""
    lines = request.config.stash.setdefault(_LINES, [])

    def add(name, ok, detail):
        lines.append(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        return ok

    return add


_LINES = pytest.StashKey[list]()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
