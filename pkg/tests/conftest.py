import pytest

from spde2d.model import DEFAULT_SPECTRUM, NoiseSpec, SpdeParams


@pytest.fixture
def ref_params():
    return SpdeParams(0.0, 0.2, 0.2, 0.2)


@pytest.fixture
def ref_noise():
    return NoiseSpec(0.5, -19.5, 0.1)


@pytest.fixture
def ref_spectrum():
    return DEFAULT_SPECTRUM
