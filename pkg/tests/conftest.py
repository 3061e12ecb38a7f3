import os

import numpy as np
import pytest


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run full-scale experiments")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow") or os.environ.get("REGREEDY_FULL") == "1":
        return
    skip = pytest.mark.skip(reason="full-scale run; use --runslow or REGREEDY_FULL=1")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
