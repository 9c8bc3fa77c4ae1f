import math

import numpy as np
import pytest
from hypothesis import settings

from sensejam import ScenarioConfig

settings.register_profile("suite", deadline=None, max_examples=25)
settings.load_profile("suite")

# Frozen scalar oracles for the baseline scenario, evaluated directly from
# the channel formulas (distances from the node positions, power law gains).
D_SD = D_ED = 353.5533905932738
H_SD2 = 1.315744255083021e-10
H_SE2 = 5.161560097185723e-11
GAMMA_D_NO_JAMMING = 13.157442550830211
GAMMA_E = 5.161560097185723
EAVES_THRESHOLD = 0.11773726152737612


@pytest.fixture
def baseline():
    """Full-size baseline scenario."""
    return ScenarioConfig()


@pytest.fixture
def small():
    """Shrunk scenario for fast solver-backed tests: 4 antennas, 5-degree
    grid, same geometry and link budget as the baseline."""
    return ScenarioConfig(
        n_t=4, n_r=4,
        resolution=math.radians(5.0),
        delta_theta=math.radians(10.0),
    )


def random_psd(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * (m @ m.conj().T) / n
