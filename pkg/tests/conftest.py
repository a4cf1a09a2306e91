import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

from factorplan.catalog import default_catalog
from factorplan.dataset import (
    default_synthesis_spec,
    stratified_split,
    synthesize_dataset,
)
from factorplan.models import TrainParams, train_scorer


@pytest.fixture(scope="session")
def catalog():
    return default_catalog()


@pytest.fixture(scope="session")
def synth_dataset(catalog):
    return synthesize_dataset(catalog, default_synthesis_spec(seed=20240401))


@pytest.fixture(scope="session")
def split_sets(synth_dataset):
    return stratified_split(synth_dataset, 0.8, seed=11)


@pytest.fixture(scope="session")
def scorer(split_sets):
    train_set, _ = split_sets
    return train_scorer(train_set, TrainParams(seed=11))
