import math

import pytest

from crpursuit import CriticalSequenceSpec, critical_sequence


@pytest.fixture(scope="session")
def critical_theta_e_small():
    """Critical ladder with theta = e and a coarse grid (fast tests)."""
    return critical_sequence(CriticalSequenceSpec(m=1.0, M=math.e, n=1000, delta=1.0))
