import numpy as np
import pytest

from models.dataset import Dataset
from schemas.synth import SynthConfig
from services.synth_service import generate


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run acceptance-scale experiments")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def small_synthetic() -> Dataset:
    """600 rows, 30% positives, 30% of positives in the minority"""
    return generate(SynthConfig(n=600, class_rate=0.3, minority_share=0.3, seed=11))


@pytest.fixture
def four_cell_dataset() -> Dataset:
    """One row per (S, Y) cell"""
    return Dataset(
        features=np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0], [7.0, 8.0]]),
        target=[1, 0, 1, 0],
        sensitive=[0, 0, 1, 1],
        feature_names=("a", "b"),
    )


def make_dataset(rng: np.random.Generator, n: int, p_features: int = 2, positive_rate: float = 0.4) -> Dataset:
    """Random dataset where every (S, Y) cell is populated"""
    target = (rng.random(n) < positive_rate).astype(int)
    sensitive = (rng.random(n) < 0.5).astype(int)
    target[:4] = [1, 0, 1, 0]
    sensitive[:4] = [0, 0, 1, 1]
    features = rng.normal(size=(n, p_features)) + target[:, None]
    return Dataset(
        features=features,
        target=target,
        sensitive=sensitive,
        feature_names=tuple(f"x{j}" for j in range(p_features)),
    )


@pytest.fixture
def dataset_factory():
    return make_dataset
