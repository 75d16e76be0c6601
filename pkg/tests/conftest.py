"""
Test fixtures for the decoybounds tests.
"""
import numpy as np
import pytest
from fastapi.testclient import TestClient

from decoybounds.api.models import ChannelParams, MdiIntensities, PhotonYieldTable
from decoybounds.main import app
from decoybounds.services.channel_sim import bb84_observables, mdi_yield_table_default

UPSILON = 0.1
MU = 0.5


@pytest.fixture
def client():
    """Test client fixture for API tests"""
    return TestClient(app)


@pytest.fixture
def params_20db():
    """Default channel at 20 dB total loss"""
    return ChannelParams(loss_db=20.0)


@pytest.fixture
def bb84_obs_20db(params_20db):
    """Model observables at 20 dB with upsilon=0.1, mu=0.5"""
    return bb84_observables(params_20db, UPSILON, MU)


@pytest.fixture
def mdi_intensities():
    """Symmetric intensities mu=0.5, nu=0.1 on both arms"""
    return MdiIntensities(mu_a=MU, nu_a=UPSILON, mu_b=MU, nu_b=UPSILON)


@pytest.fixture
def mdi_table_20db(params_20db):
    """Default product-loss table with 20 dB on each arm"""
    return mdi_yield_table_default(params_20db, params_20db, cutoff=16)


def make_table(entries: dict, cutoff: int = 16, e00: float = 0.0) -> PhotonYieldTable:
    """Table that is zero except for the given {(i, j): (Y_ij, e_ij)} entries."""
    yields = np.zeros((cutoff + 1, cutoff + 1))
    errors = np.zeros((cutoff + 1, cutoff + 1))
    errors[0, 0] = e00
    for (i, j), (y, e) in entries.items():
        yields[i, j] = y
        errors[i, j] = e
    return PhotonYieldTable.from_arrays(yields, errors)


@pytest.fixture
def single_photon_table():
    """Only Y_11 = 0.01 with e_11 = 0.02"""
    return make_table({(1, 1): (0.01, 0.02)})


@pytest.fixture
def two_photon_table():
    """Y_11 = 0.01, e_11 = 0.02 plus a multi-photon Y_22 = 0.05, e_22 = 0.1"""
    return make_table({(1, 1): (0.01, 0.02), (2, 2): (0.05, 0.1)})


@pytest.fixture
def rng():
    """Seeded generator so randomized checks are reproducible"""
    return np.random.default_rng(20240601)
