import pathlib

import pytest

from aerovr.demo import generate_demo_dataset


@pytest.fixture(scope="session")
def demo_root(tmp_path_factory) -> pathlib.Path:
    """Data root with one small demo dataset (designs, qois, meshes)."""
    root = tmp_path_factory.mktemp("data")
    generate_demo_dataset(root / "demo", d=5, n=40, seed=3)
    return root


@pytest.fixture(scope="session")
def two_dataset_root(tmp_path_factory) -> pathlib.Path:
    root = tmp_path_factory.mktemp("data2")
    generate_demo_dataset(root / "alpha", d=4, n=30, seed=11, with_geometry=False)
    generate_demo_dataset(root / "beta", d=4, n=30, seed=12, with_geometry=False)
    return root
