import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def away_from_lines(rng, n, lo, hi, step, offset=0.0, gap=0.1):
    """n samples in [lo, hi] at least ``gap`` from every offset + k*step."""
    out = []
    while len(out) < n:
        x = rng.uniform(lo, hi)
        r = (x - offset) % step
        if gap < r < step - gap:
            out.append(x)
    return np.array(out)


HALF_PI = math.pi / 2
