import numpy as np
import pytest

import ucbf


def test_gallery_lists_six_scenarios():
    ids = [s["id"] for s in ucbf.list_scenarios()]
    assert ids == ["A", "B", "C", "D", "E", "F"]


def test_config_overrides_round_trip():
    cfg = ucbf.config("A", {"adaptation.gamma": 2.5})
    assert cfg["adaptation"]["gamma"] == 2.5
    again = ucbf.config(cfg)
    assert again == cfg


def test_bad_config_raises():
    with pytest.raises(ucbf.ConfigError):
        ucbf.config("A", {"adaptation.gamma": 0.0})
    with pytest.raises(ucbf.UnsupportedFeature):
        ucbf.config("A", {"input_box": {"kind": "ball", "radius": 1.0}})


def test_premises_and_certificate():
    p = ucbf.check_premises("A")
    assert p["ok"] and p["admissible"]
    assert p["threshold"] == pytest.approx(0.5)
    low = ucbf.check_premises("A", {"adaptation.gamma": 0.25})
    assert not low["ok"]
    cert = ucbf.verify("A", jobs=2)
    assert cert["pass"]
    assert cert["min_margin"] >= 0.0
    assert not ucbf.verify("A", {"input_box": [-0.1, 0.1]})["pass"]


def test_run_returns_trace_arrays():
    res = ucbf.run("A", {"T": 1.0})
    assert res["pass"]
    tr = res["trace"]
    n = len(tr["t"])
    assert n == 1001
    assert tr["x"].shape == (n, 2)
    assert tr["theta_hat"].shape == (n, 1)
    assert np.all(tr["h"] >= -1e-6)
    assert res["report"]["min_h"] == pytest.approx(tr["h"].min())


def test_sweep_rows():
    rows = ucbf.sweep("A", "gamma", [1.0, 2.0], {"T": 0.5})
    assert [r["value"] for r in rows] == [1.0, 2.0]
    assert all(r["pass"] for r in rows)


def test_qp_entry_points():
    # single safety row u <= -1 with nominal 0 projects to -1
    sol = ucbf.pointwise_filter(np.array([0.0]), [(np.array([1.0]), -1.0, False)])
    assert sol["status"] == "optimal"
    assert sol["u"][0] == pytest.approx(-1.0, abs=1e-12)
    sol = ucbf.solve_min_norm([(np.array([1.0, 0.0]), -2.0, False)], 100.0, np.array([-5.0, -5.0]), np.array([5.0, 5.0]))
    assert np.allclose(sol["u"], [-2.0, 0.0], atol=1e-12)
    p = ucbf.project_halfspace(np.array([1.0, 1.0]), np.array([1.0, 1.0]), 0.0)
    assert np.allclose(p, [0.0, 0.0], atol=1e-15)
    assert ucbf.tightened_threshold(2.0, np.array([1.0])) == pytest.approx(0.25)
