"""
Tests for the Decoy Bounds API.
"""
import pytest

from decoybounds import __version__
from decoybounds.api.models import MDI_PAIR_KEYS
from decoybounds.services.channel_sim import mdi_observables_from_table


def test_health_check(client):
    """Test the health check endpoint"""
    # Make request
    response = client.get("/health")

    # Verify response
    assert response.status_code == 200
    data = response.json()
    assert data["status"] == "UP"
    assert data["version"] == __version__
    assert data["message"] == "Estimators ready"


def test_health_check_head(client):
    """Test the HEAD health check endpoint"""
    response = client.head("/health")

    assert response.status_code == 200
    assert response.content == b""


def test_bb84_bounds(client, bb84_obs_20db):
    """Test estimating BB84 bounds from model observables"""
    # Make request
    response = client.post(
        "/bb84/bounds",
        json={"observables": bb84_obs_20db.model_dump(by_alias=True)},
    )

    # Verify response
    assert response.status_code == 200
    data = response.json()
    assert data["bounds"]["y1_lower"] == pytest.approx(9.6991865e-3, abs=1e-10)
    assert data["bounds"]["y1_global"] == pytest.approx(9.7195282e-3, abs=1e-10)
    assert data["bounds"]["min_case"] == 1
    assert data["rate_global"] == pytest.approx(1.92e-3, abs=1e-4)
    assert data["rate_separate"] <= data["rate_global"]
    assert data["flags"] == []


def test_bb84_bounds_invalid_observables(client):
    """Test an error-gain above its gain is rejected by validation"""
    response = client.post(
        "/bb84/bounds",
        json={
            "observables": {
                "upsilon": 0.1,
                "mu": 0.5,
                "Q": {"omega": 3e-6, "upsilon": 1e-3, "mu": 5e-3},
                "EQ": {"omega": 1.5e-6, "upsilon": 2e-3, "mu": 1e-4},
            }
        },
    )

    assert response.status_code == 422


def test_bb84_bounds_misordered_intensities(client):
    """Test a decoy intensity above the signal intensity is rejected by validation"""
    response = client.post(
        "/bb84/bounds",
        json={
            "observables": {
                "upsilon": 0.5,
                "mu": 0.1,
                "Q": {"omega": 3e-6, "upsilon": 5e-3, "mu": 1e-3},
                "EQ": {"omega": 1.5e-6, "upsilon": 1e-4, "mu": 1e-5},
            }
        },
    )

    assert response.status_code == 422


def test_mdi_bounds(client, two_photon_table, mdi_intensities):
    """Test estimating MDI bounds from table observables"""
    obs = mdi_observables_from_table(two_photon_table, mdi_intensities)

    response = client.post(
        "/mdi/bounds",
        json={"observables": obs.model_dump(by_alias=True)},
    )

    assert response.status_code == 200
    data = response.json()
    assert set(data["tilde"]["tilde_q"]) == {"mu_mu", "mu_nu", "nu_mu", "nu_nu"}
    assert data["bounds"]["delta"] > 0
    assert data["bounds"]["pa_global"] > data["bounds"]["pa_separate"]


def test_mdi_bounds_missing_pair(client, mdi_intensities):
    """Test observables without the vacuum/vacuum pair"""
    gains = {key: 1e-4 for key in MDI_PAIR_KEYS if key != "0_0"}

    response = client.post(
        "/mdi/bounds",
        json={
            "observables": {
                "intensities": mdi_intensities.model_dump(),
                "Q": gains,
                "EQ": gains,
            }
        },
    )

    assert response.status_code == 400
    data = response.json()
    assert data["error_code"] == "MISSING_PAIR"
    assert "0_0" in data["message"]


def test_minimize(client):
    """Test the closed-form minimum of a case 3 instance"""
    response = client.post("/minimize", json={"A": 1.0, "B": 0.0, "C": 0.1, "D": 1.0, "E": 1.0})

    assert response.status_code == 200
    data = response.json()
    assert data["case_id"] == 3
    assert data["x"] == 1.0
    assert data["y"] == 1.0
    assert data["value"] == pytest.approx(0.6165533, abs=1e-6)


def test_minimize_infeasible(client):
    """Test an instance whose domain is empty"""
    response = client.post("/minimize", json={"A": 0.5, "B": 0.2, "C": 0.1, "D": 0.1, "E": 0.5})

    assert response.status_code == 400
    assert response.json()["error_code"] == "INFEASIBLE_DOMAIN"


def test_sweep(client):
    """Test a small BB84 sweep returned as rows"""
    response = client.post("/sweeps", json={"loss_start": 0.0, "loss_end": 2.0, "loss_step": 1.0})

    assert response.status_code == 200
    rows = response.json()
    assert [row["loss_db"] for row in rows] == [0.0, 1.0, 2.0]
    assert all(row["rate_separate"] <= row["rate_global"] for row in rows)


def test_sweep_reports_nan_ratios_as_null(client):
    """Test a loss with no asymptotic key serializes nan ratios as null"""
    response = client.post("/sweeps", json={"loss_start": 60.0, "loss_end": 60.0})

    assert response.status_code == 200
    (row,) = response.json()
    assert row["rate_asymptotic"] == 0.0
    assert row["ratio_rate_global"] is None


@pytest.mark.parametrize("field", ["observables", "yield_table"])
def test_sweep_rejects_server_side_files(client, tmp_path, field):
    """Test file inputs are refused on the HTTP surface"""
    body = {field: str(tmp_path / "input.json")}
    if field == "yield_table":
        body["protocol"] = "mdi"

    response = client.post("/sweeps", json=body)

    assert response.status_code == 422


def test_sweep_caps_workers(client):
    """Test a worker count above the service limit"""
    response = client.post("/sweeps", json={"loss_end": 1.0, "workers": 1000})

    assert response.status_code == 422


def test_sweep_invalid_config(client):
    """Test a non-positive loss step"""
    response = client.post("/sweeps", json={"loss_step": 0.0})

    assert response.status_code == 422
