import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_configure(config):
    config.acceptance_lines = []


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""

    def judge(label: str, conditions: dict, detail: str = ""):
        ok = all(bool(v) for v in conditions.values())
        line = f"{'PASS' if ok else 'FAIL'}  {label}  {detail}".rstrip()
        request.config.acceptance_lines.append(line)
        print(line)
        failed = [k for k, v in conditions.items() if not v]
        assert ok, f"{label}: failed {failed}; {detail}"

    return judge


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if config.acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in config.acceptance_lines:
            terminalreporter.write_line(line)
