import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_LOG = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LOG] = []


@pytest.fixture
def record(request):
    """Log one acceptance line; printed in the terminal summary."""
    log = request.config.stash[_LOG]

    def _record(criterion: str, ok: bool, detail: str) -> None:
        log.append((criterion, bool(ok), detail))

    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = config.stash.get(_LOG, [])
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, ok, detail in sorted(log, key=lambda r: int(r[0].split()[0])):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}")
