import os
from pathlib import Path

import numpy as np
import pytest

from granular_balls import Dataset, load_csv, make_gaussian_mixture, min_max_normalize

ROOT = Path(__file__).resolve().parents[1]


def fourclass_path():
    """Location of the fourclass CSV: $GB_FOURCLASS, else data/fourclass.csv."""
    env = os.environ.get("GB_FOURCLASS")
    return Path(env) if env else ROOT / "data" / "fourclass.csv"


def load_fourclass():
    """Normalized fourclass dataset, or None when the file is not present."""
    path = fourclass_path()
    if not path.is_file():
        return None
    return min_max_normalize(load_csv(path))


def random_dataset(rng, n, d=2, k=2):
    return Dataset(rng.random((n, d)), rng.integers(0, k, n))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def toy_datasets():
    """Small datasets every generator is exercised on."""
    rng = np.random.default_rng(7)
    three = np.concatenate([rng.normal(c, 0.6, (60, 2)) for c in ((0, 0), (3, 0), (0, 3))])
    return {
        "mixture": make_gaussian_mixture(300, 2, 2.5, seed=1),
        "mixture3d": make_gaussian_mixture(250, 3, 2.0, weights=(0.6, 0.4), seed=2),
        "three_class": Dataset(three, np.repeat([0, 1, 2], 60)),
        "uniform_noise": random_dataset(rng, 150, 2, 3),
        "duplicates": Dataset(np.repeat(rng.random((20, 2)), 3, axis=0),
                              rng.integers(0, 2, 60)),
        "single_class": Dataset(rng.random((30, 2)), np.zeros(30, dtype=np.int64)),
    }


# one line per acceptance criterion, echoed after the test run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
