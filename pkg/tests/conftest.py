import os
import random
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from qpcone.core import Subset

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

FIXTURES = Path(__file__).resolve().parent.parent / "src" / "qpcone" / "fixtures"


def S(n, *atoms):
    return Subset.of(n, atoms)


def label(n, text):
    """``label(5, "235")`` is the subset {2,3,5}."""
    return Subset.of(n, [int(c) for c in text])


def random_weights(rng: random.Random, n: int, top: int = 40):
    return [Fraction(rng.randint(1, top)) for _ in range(n)]


@pytest.fixture
def fixtures():
    return FIXTURES
