from __future__ import annotations

import numpy as np
import pytest

from core.network import Network, NetworkSpec, init_network, make_spec
from tools.dataset import Dataset
from tools.synth import synth_pairs


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240917)


@pytest.fixture
def tiny_spec() -> NetworkSpec:
    """Two layers, shrink 4: 5x21x21 crops map to 1x17x17."""
    return make_spec([3, 3], [4, 1], in_channels=5)


@pytest.fixture
def tiny_net(tiny_spec: NetworkSpec) -> Network:
    return init_network(tiny_spec, seed=7, dtype=np.float64, std=0.1)


@pytest.fixture(scope="session")
def synth4() -> Dataset:
    return synth_pairs(seed=3, n=4)


@pytest.fixture(scope="session")
def synth12() -> Dataset:
    return synth_pairs(seed=11, n=12)
