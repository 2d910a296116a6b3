import json
import math

import numpy as np
import pytest

import sqzom


def test_bundled_params_match_defaults():
    assert sqzom.bundled_params() == sqzom.SystemParams()


def test_drive_excess_noise():
    cov = sqzom.drive_covariance(sqzom.DriveState.coherent(1.0), sqzom.bundled_params())
    assert sqzom.variance_to_db(cov.vxx) == pytest.approx(1.271048, abs=1e-6)


def test_budget_values():
    b = sqzom.budget(sqzom.DriveState.amplitude_squeezed(1.0, 70.0), sqzom.bundled_params())
    assert b.n_ba == pytest.approx(34.551992379215493, rel=1e-12)
    assert b.n_add == pytest.approx(b.n_imp + b.n_ba)


def test_domain_error_is_value_error():
    with pytest.raises(sqzom.DomainError):
        sqzom.DriveState(0.0, 0.0, -1.0)
    with pytest.raises(ValueError):
        sqzom.DriveState(-1.0, 0.0, 1.0)


def test_unknown_config_key():
    with pytest.raises(sqzom.ConfigError, match="bogus"):
        sqzom.parse_params("bogus = 1\n")


def test_output_psd_is_symmetric_on_axis():
    p = sqzom.bundled_params()
    grid = sqzom.offset_grid(8000.0, 801)
    s = sqzom.output_psd(sqzom.DriveState.phase_squeezed(1.0, 220.0), p, grid)
    assert isinstance(s["psd"], np.ndarray)
    np.testing.assert_allclose(s["psd"], s["psd"][::-1], rtol=1e-9)
    assert s["psd"].max() > s["floor"]


def test_tomography_round_trip():
    p = sqzom.bundled_params()
    theta, power = sqzom.simulate_phase_sweep(0.75, p, 250.0)
    est = sqzom.fit_squeezing(list(theta), list(power), p.eta_in)
    assert est["r_hat"] == pytest.approx(0.75, abs=1e-3)


def test_optimizer_ideal_limit():
    p = sqzom.SystemParams()
    p.eta_det = 1.0
    p.eta_in = 1.0
    p.n_c = 0.0
    res = sqzom.minimize_added_noise(p)
    assert res["value"] == pytest.approx(0.5, abs=1e-6)
    assert res["audit_passed"]


def test_sweep_families():
    rows = sqzom.sweep(1.0, points=5)
    assert set(rows) == {"unsqueezed", "amplitude_squeezed", "phase_squeezed"}
    products = [b.n_imp * b.cooperativity for b in rows["phase_squeezed"]]
    assert max(products) == pytest.approx(min(products), rel=1e-12)


def test_monte_carlo_is_seeded():
    p = sqzom.bundled_params()
    d = sqzom.DriveState(1.0, math.pi / 2, 70.0)
    a = sqzom.simulate_psd(d, p, segments=16, seed=3)
    b = sqzom.simulate_psd(d, p, segments=16, seed=3)
    np.testing.assert_array_equal(a["psd"], b["psd"])


def test_cli_entry():
    code, out, err = sqzom.run_cli(["budget", "--C", "70"])
    assert code == 0 and err == ""
    assert json.loads(out)["C"] == 70.0
    code, _, err = sqzom.run_cli(["reproduce", "nope"])
    assert code == 2
    assert json.loads(err)["error"] == "usage"
