import numpy as np
import pytest

from lapmark.datasets import build_standard_dataset, load_standard


@pytest.fixture(scope="session")
def dataset_dir(tmp_path_factory):
    """Standard test images written as PGM files."""
    d = tmp_path_factory.mktemp("images")
    written = build_standard_dataset(d)
    if not written:
        pytest.skip("no standard test images available")
    return d


@pytest.fixture(scope="session")
def aerial():
    return load_standard("aerial")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
