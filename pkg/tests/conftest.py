import numpy as np
import pytest

from schemas.recording_schemas import GeneratorConfig
from services.dataio import generate_synthetic

SMALL_CONFIG = dict(n_subjects=3, trials_per_subject=6, n_channels=4, n_samples=400, set_a=[0], set_b=[2])
BENCH_CONFIG = dict(n_subjects=4, trials_per_subject=20, n_channels=4, n_samples=400, contrast=0.9, set_a=[0], set_b=[2])


def _make_blobs(n=1000, d=10, shift=2.0, seed=0):
    """Duas nuvens gaussianas (σ=1) centradas em −shift e +shift em todas as dimensões."""
    rng = np.random.default_rng(seed)
    y = rng.permutation(np.repeat([0, 1], [n // 2, n - n // 2]))
    X = rng.standard_normal((n, d)) + np.where(y[:, None] == 1, shift, -shift)
    return X, y


@pytest.fixture
def make_blobs():
    return _make_blobs


@pytest.fixture
def small_config():
    return GeneratorConfig(**SMALL_CONFIG)


@pytest.fixture
def small_recordings(small_config):
    return generate_synthetic(small_config)


@pytest.fixture
def bench_recordings():
    return generate_synthetic(GeneratorConfig(**BENCH_CONFIG))


@pytest.fixture(scope="session")
def fixture_recordings():
    """Dataset de referência: seed 42, 30 sujeitos × 120 trials, demais valores padrão."""
    return generate_synthetic(GeneratorConfig(seed=42))


@pytest.fixture(scope="session")
def fixture_features(fixture_recordings):
    from services.dsp import extract_features
    return extract_features(fixture_recordings)
