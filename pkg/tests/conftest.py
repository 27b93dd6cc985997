import numpy as np
import pytest

from tonereserve import SystemConfig


@pytest.fixture
def small_cfg():
    """64-point toy system: 11 data subcarriers, 3 reserved tones, CP of 8."""
    return SystemConfig(n_fft=64, n_cp=8, data_indices=tuple(range(1, 12)),
                        tr_indices=(-5, -9, 14), seed=3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
