import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from critlap.grid import DomainSpec, build_domain

settings.register_profile(
    "critlap",
    derandomize=True,
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("critlap")


def box(n=2, h=1 / 16, lo=0.0, hi=1.0):
    return build_domain(DomainSpec("box", h, {"lo": [lo] * n, "hi": [hi] * n}))


def ball(n=2, h=1 / 16, r=1.0):
    return build_domain(DomainSpec("ball", h, {"center": [0.0] * n, "radius": r}))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, name, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d} [{'PASS' if ok else 'FAIL'}] {name}: {detail}")
