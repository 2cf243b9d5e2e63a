import json
import math

import numpy as np
import pytest

import mimo_sim


def test_presets_listed():
    names = mimo_sim.preset_names()
    assert "fig4" in names and "example3" in names
    assert "fig4" in mimo_sim.list_presets()
    cfg = json.loads(mimo_sim.preset_config("fig4"))
    assert cfg["scenario"]["L"] == 4


def test_zf_fixture():
    sinr, closed = mimo_sim.example1_zf(100, 50)
    assert math.isclose(sinr, closed, rel_tol=1e-9)
    assert abs(sinr - 9.8361) < 1e-3


def test_bad_config_raises_value_error():
    with pytest.raises(ValueError, match="rho_ul"):
        mimo_sim.normalize_config('{"schemes": ["mr"], "scenario": {"M": 16, "rho_ul": -1.0}}')
    with pytest.raises(ValueError):
        mimo_sim.run(preset="nope")


def test_small_run_is_deterministic():
    cfg = json.dumps({
        "schemes": ["mr", "m-mmse"],
        "trials": 10,
        "seed": 3,
        "scenario": {"L": 2, "K": 1, "M": [8, 16]},
    })
    a = mimo_sim.run(config=cfg)
    b = mimo_sim.run(config=cfg, threads=2)
    assert a["csv"] == b["csv"]
    rows = [r for r in a["rows"] if r["ue"] == "all"]
    assert len(rows) == 4
    assert all(r["se_mean"] > 0 for r in rows)
    assert json.loads(a["manifest"])["config"]["seed"] == 3


def test_dependent_pair_has_zero_delta():
    r = mimo_sim.exp_corr(1.0, 0.5, 0.3, 16)
    assert r.shape == (16, 16) and np.iscomplexobj(r)
    d = mimo_sim.two_user_delta(r, 2.0 * r)
    assert abs(d["delta1"]) < 1e-9 * d["beta11"]
    margin, lam = mimo_sim.independence_margin([r, 2.0 * r])
    assert margin < 1e-10
    assert lam[0] == 1.0


def test_identity_pair_sinr():
    m = 64
    se, sinr = mimo_sim.two_user_ul(2.0 * np.eye(m), np.eye(m), trials=50)
    assert 3.0 < sinr < 4.5
    assert se > 0


def test_pcp_shrinks_with_M():
    b = np.array([[1.0, 0.3], [0.4, 0.8]])
    small, _ = mimo_sim.pcp_deviation(64, b, trials=20)
    large, _ = mimo_sim.pcp_deviation(1024, b, trials=20)
    assert large < small
