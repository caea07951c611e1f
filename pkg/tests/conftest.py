import numpy as np
import pytest

from frik.config import DEFAULT_Q0_DEG, default_workpiece_frame
from frik.robot import irb4600


@pytest.fixture(scope="session")
def model():
    return irb4600()


@pytest.fixture(scope="session")
def q0_benchmark():
    return np.radians(np.array(DEFAULT_Q0_DEG))


@pytest.fixture(scope="session")
def workpiece_frame():
    return default_workpiece_frame()


def random_rotation(rng) -> np.ndarray:
    """Uniform-ish random rotation from a random axis and angle."""
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    angle = rng.uniform(0.0, np.pi - 0.05)
    from frik.liegroup import so3_exp

    return so3_exp(angle * axis)
