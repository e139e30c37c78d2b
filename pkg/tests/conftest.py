import os
import pathlib
import sys

import numpy as np
import pytest

sys.path.insert(0, str(pathlib.Path(__file__).parent))

from yeastlike import write_csv  # noqa: E402

from xplainbench.data import (  # noqa: E402
    AlertnessGenConfig,
    generate_alertness,
    train_test_split,
)

YEAST_ENV = "XPLAINBENCH_YEAST_CSV"
GOLDEN_DIR = pathlib.Path(__file__).parent / "golden"
FIXTURE_DIR = pathlib.Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def yeast_csv(tmp_path_factory):
    """Path to the canonical yeast CSV if provided via the environment,
    otherwise a deterministic surrogate with matching shape and difficulty."""
    env = os.environ.get(YEAST_ENV)
    if env:
        return env
    path = tmp_path_factory.mktemp("yeast") / "yeast.csv"
    write_csv(path, seed=0)
    return str(path)


@pytest.fixture(scope="session")
def alertness_small():
    return generate_alertness(AlertnessGenConfig(n=2000, seed=7))


@pytest.fixture(scope="session")
def alertness_split(alertness_small):
    return train_test_split(alertness_small, 0.2, seed=7)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
