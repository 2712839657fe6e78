"""Shared fixtures: the Tetris dataset and an ancestor trained on it."""

import pytest

from steerable_spheres.data import Dataset, tetris_dataset
from steerable_spheres.mlgp import MLGPParams
from steerable_spheres.train import TrainConfig, train


@pytest.fixture(scope="session")
def tetris() -> Dataset:
    return tetris_dataset()


@pytest.fixture(scope="session")
def tetris_ancestor(tetris: Dataset) -> MLGPParams:
    """First of seeds 0..4 that classifies all eight shapes within 5000 epochs."""
    for seed in range(5):
        result = train(tetris, TrainConfig(epochs=5000, seed=seed, log_every=5000))
        if result.final_accuracy == 100.0:
            return result.params
    pytest.fail("No seed in 0..4 reached 100% Tetris accuracy within 5000 epochs.")
