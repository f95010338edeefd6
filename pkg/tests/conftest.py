from __future__ import annotations

import os

import pytest
from hypothesis import HealthCheck, settings

from nilstrata.catalog import load_catalog

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("quick", deadline=None, max_examples=10,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_CRITERIA = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_CRITERIA] = {}


@pytest.fixture(scope="session")
def catalog():
    return load_catalog()


@pytest.fixture
def record_criterion(request):
    """Record (title, ok, detail) for the acceptance summary printed at the end."""
    lines = request.config.stash[_CRITERIA]

    def record(number: int, title: str, ok: bool, detail: str = "") -> None:
        lines[number] = (title, ok, detail)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_CRITERIA, {})
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(lines):
        title, ok, detail = lines[n]
        tail = f"  [{detail}]" if detail else ""
        terminalreporter.write_line(f"criterion {n:>2}  {'PASS' if ok else 'FAIL'}  {title}{tail}")
