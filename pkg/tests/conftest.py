"""
Shared fixtures. Puts src/ on sys.path the same way src/main.py does.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / 'src'))

from models.channel import FadingModel, PathLossModel  # noqa: E402
from models.geometry import NetworkModel, RadialIntensity  # noqa: E402


def make_network(
    kind: str = 'g2',
    alpha: float = 4.0,
    lam: float = 1.0,
    power: float = 1.0,
    fading: FadingModel = None,
    intensity: RadialIntensity = None
) -> NetworkModel:
    """Network model with deterministic unit fading on the plain stationary PPP unless overridden."""
    pathloss = PathLossModel.inverse_shifted(alpha) if kind == 'g1' else PathLossModel.inverse_sum(alpha)
    return NetworkModel(
        lam=lam,
        power=power,
        pathloss=pathloss,
        fading=fading or FadingModel.deterministic(1.0),
        intensity=intensity or RadialIntensity.stationary()
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def g2_network():
    """G2, alpha = 4, stationary, lambda = P = 1, H = 1: mean pi^2/2, variance pi^2/4."""
    return make_network('g2', 4.0)


@pytest.fixture
def g1_network():
    return make_network('g1', 4.0)


@pytest.fixture
def tmp_out(tmp_path):
    return tmp_path / 'out'


@pytest.fixture
def network_factory():
    return make_network
