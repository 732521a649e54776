import numpy as np
import pytest

from anomalycd import RunConfig, SynthConfig, generate


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_cfg():
    # small, fast scene for unit tests; defaults are exercised elsewhere
    # anomaly and movers sized so their painted plateaus fit inside the top
    # 6% pixel budget of a 128px tile
    return SynthConfig(seed=1, size=128, steps=4, movers=1, clutter=2,
                       mover_size=(8, 10), anomaly_size=(24, 26),
                       clutter_size=(16, 20))


@pytest.fixture(scope="session")
def small_scene(small_cfg):
    scene, _ = generate(small_cfg)
    return scene


@pytest.fixture(scope="session")
def small_run_config():
    return RunConfig(tile_size=128, workers=1)
