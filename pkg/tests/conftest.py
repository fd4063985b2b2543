import pytest

from autoreview.fields import standard_field_specs
from autoreview.pipeline import train_models
from autoreview.simulator import SimConfig, generate_split


@pytest.fixture(scope="session")
def specs():
    return standard_field_specs()


@pytest.fixture(scope="session")
def small_corpus():
    """Shared noisy corpus, small enough for fast module tests."""
    cfg = SimConfig()
    return {
        "train": generate_split(cfg, "train", 220),
        "validation": generate_split(cfg, "validation", 60),
        "test": generate_split(cfg, "test", 120),
    }


@pytest.fixture(scope="session")
def small_models(small_corpus, specs):
    train_calls, train_records = small_corpus["train"]
    val_calls, val_records = small_corpus["validation"]
    models, _ = train_models(train_calls, train_records, val_calls, val_records, specs)
    return models


@pytest.fixture(scope="session")
def clean_corpus(specs):
    cfg = SimConfig(
        splits={},
        severity=0.0,
        error_rate={fid: 0.0 for fid in specs},
        not_provided_rate=0.0,
    )
    return generate_split(cfg, "clean", 150)
