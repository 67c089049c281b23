import numpy as np
import pytest

from config import Config


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="also run the acceptance-scale experiments")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: acceptance-scale experiment, needs --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def restore_config(monkeypatch):
    """Snapshot every Config default so overrides made by a test are undone"""
    for name in dir(Config):
        if name.isupper():
            monkeypatch.setattr(Config, name, getattr(Config, name))
    return Config


@pytest.fixture
def clean_env(monkeypatch):
    import os
    for key in list(os.environ):
        if key.startswith("LEAFGROWTH_"):
            monkeypatch.delenv(key)
    return monkeypatch
