import numpy as np
import pytest
from loguru import logger

from kronfdr.models.matrices import Dataset, PrecisionMatrix
from kronfdr.models.schemas import GraphKind, SimConfig, TuningGrid
from kronfdr.services.graphs import gen_precision
from kronfdr.services.sampler import build_model, sample_dataset


@pytest.fixture(autouse=True)
def quiet_logs():
    """Keep loguru at WARNING during tests; the CLI tests re-add their own sinks."""
    logger.remove()
    handler = logger.add(lambda msg: None, level="WARNING")
    yield
    try:
        logger.remove(handler)
    except ValueError:
        pass


@pytest.fixture
def band_model():
    omega = gen_precision(GraphKind(kind="band"), 8)
    gamma = gen_precision(GraphKind(kind="band"), 10)
    return build_model(omega, gamma)


@pytest.fixture
def small_dataset(band_model) -> Dataset:
    """n=30 draws of an 8 x 10 band/band model."""
    return sample_dataset(band_model, 30, seed=7)


@pytest.fixture
def random_dataset() -> Dataset:
    rng = np.random.default_rng(11)
    return Dataset(samples=rng.standard_normal((12, 6, 7)))


@pytest.fixture
def diag_precision():
    def make(dim: int) -> PrecisionMatrix:
        return PrecisionMatrix.from_entries(np.eye(dim))
    return make


@pytest.fixture
def small_config(tmp_path) -> SimConfig:
    return SimConfig(
        n=20, p=10, q=10,
        omega_kind=GraphKind(kind="band"),
        gamma_kind=GraphKind(kind="band"),
        alpha=0.1,
        replications=2,
        seed=5,
        tuning_grid=TuningGrid(lambdas=[2.0], deltas=[2.0]),
        output_dir=tmp_path / "out",
        max_workers=2,
    )
