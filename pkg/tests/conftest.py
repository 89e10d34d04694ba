import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from vacuumlab.solutions import mollifier, polarized_profile

settings.register_profile(
    "vacuumlab", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("vacuumlab")


def random_points(rng, n, half_width=1.0, t_range=(0.0, 0.0)):
    pts = np.empty((n, 4))
    pts[:, :3] = rng.uniform(-half_width, half_width, size=(n, 3))
    pts[:, 3] = rng.uniform(*t_range, size=n)
    return pts


def polarized_special(center=(0.0, 0.0, 0.0)):
    """The two-plateau profile (A y sin wx + B z cos wx) * chi used throughout."""
    return polarized_profile(1.0, 0.5, 3.0, 0.6, 1.0, center)


def profile_zoo():
    return [
        mollifier((0.0, 0.0, 0.0), 1.0, 1.0),
        mollifier((0.1, -0.2, 0.15), 0.8, 2.0),
        polarized_special(),
        polarized_profile(2.0, -1.0, 5.0, 0.4, 0.9),
        polarized_profile(0.5, 1.5, 2.0, 0.5, 1.1, (0.05, 0.0, -0.05)),
    ]


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


def pytest_terminal_summary(terminalreporter):
    """Repeat the acceptance criterion lines after the test report."""
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
