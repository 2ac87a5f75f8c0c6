import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# acceptance results collected by tests/test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, line = ACCEPTANCE[k]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {k:2d}. {line}")


@pytest.fixture(scope="session")
def surface():
    from hitchin_forge.fuchsian import glue_genus2
    return glue_genus2((4, 4, 4), (4, 4, 4))


@pytest.fixture(scope="session")
def small_census(surface):
    """Radius-10 census with a few grafted labels, for fast module tests."""
    from hitchin_forge.census import build_census
    from hitchin_forge.grafting import grafting_ray, hitchin_base, kernel_direction
    base = hitchin_base(surface, 3)
    z = kernel_direction(3)
    reps = {f"ray:{t:g}": grafting_ray(base, z, t).letters() for t in (0.0, 1.0, 2.0, 4.0)}
    return build_census(surface, reps, radius=10.0, subsurface_radius=14.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
