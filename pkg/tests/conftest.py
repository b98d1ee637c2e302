"""Shared fixtures: the default synthetic dataset is expensive enough to build once."""

import pytest

from lfba import scenes


@pytest.fixture(scope="session")
def default_dataset():
    """The ~1000-sample, 5-run, seed-42 dataset used across the suite."""
    return scenes.generate_dataset(
        runs=scenes.DEFAULT_RUNS,
        scale=scenes.DEFAULT_SCALE,
        config=scenes.GeneratorConfig(seed=42),
    )
