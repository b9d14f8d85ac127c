import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "repo", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repo")


@pytest.fixture
def rng():
    return np.random.default_rng(7)


_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LINES] = []


@pytest.fixture
def report(request):
    """Record one ``[PASS]``/``[FAIL]`` line for an acceptance criterion."""
    lines = request.config.stash[_LINES]

    def emit(tag, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] {tag}: {detail}"
        lines.append(line)
        print(line)
        return passed

    return emit


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("AC")[1].split(":")[0].split(" ")[0])):
            terminalreporter.write_line(line)
