"""공용 fixture"""

from pathlib import Path

import numpy as np
import pytest

from softcoul.config_utils import DEFAULT_SETTINGS
from softcoul.potential_utils import PotentialParams

REPO_ROOT = Path(__file__).resolve().parent.parent
GOLDEN_DIR = Path(__file__).resolve().parent / "golden"


@pytest.fixture
def settings():
    return DEFAULT_SETTINGS


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def hydrogen():
    return PotentialParams(Z=1.0, beta=0.0, q=1.0)


@pytest.fixture
def soft_core():
    return PotentialParams(Z=1.0, beta=1.0, q=1.0)


@pytest.fixture
def golden_dir():
    return GOLDEN_DIR


@pytest.fixture
def repo_root():
    return REPO_ROOT
