import os
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # oracles / phantom helpers


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def dataset_root(name):
    """Locate a real dataset under VESSELMAT_DATA, else None (tests skip)."""
    base = os.environ.get("VESSELMAT_DATA")
    if not base:
        return None
    root = Path(base) / name
    return root if root.is_dir() else None


def require_dataset(name):
    root = dataset_root(name)
    if root is None:
        pytest.skip(f"{name} dataset not available (set VESSELMAT_DATA)")
    return root
