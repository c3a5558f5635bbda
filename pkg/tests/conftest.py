import os
import time

import pytest
from hypothesis import HealthCheck, settings

from slrf.cli import run_config
from slrf.config import FlowConfig

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=300, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_RUNS: dict[FlowConfig, tuple] = {}
ACCEPTANCE_LINES: list[str] = []


def timed_run(config: FlowConfig):
    """(result, seconds) for a flow, computed once per distinct config."""
    if config not in _RUNS:
        start = time.perf_counter()
        result = run_config(config)
        _RUNS[config] = (result, time.perf_counter() - start)
    return _RUNS[config]


@pytest.fixture(scope="session")
def cached_run():
    return lambda config: timed_run(config)[0]


@pytest.fixture(scope="session")
def timed():
    return timed_run


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line per acceptance criterion, then assert."""

    def record(number: int, ok: bool, detail: str) -> None:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
