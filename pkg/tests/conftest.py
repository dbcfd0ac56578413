import numpy as np
import pytest
from hypothesis import settings

from nonclassicality.datasets import preset, simulate, to_sample_sets

settings.register_profile("repo", deadline=None, max_examples=60)
settings.load_profile("repo")


@pytest.fixture(scope="session")
def table_states():
    """Simulated presets at M=10^3, built once per session."""
    cache = {}

    def get(name: str, M: int = 1000, seed: int = 0):
        key = (name, M, seed)
        if key not in cache:
            cfg = preset(name, M=M, seed=seed)
            cache[key] = (cfg, to_sample_sets(simulate(cfg)))
        return cache[key]

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
