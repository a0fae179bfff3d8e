"""End-to-end smoke checks for the python module."""

import math

import privshape


def test_scoring_roundtrip():
    xs = [1.0, 2.0, 3.0, 4.0] * 50
    binning = privshape.BinningScheme(0.5, 4.5, 4, 0.5, 4.5, 4)
    assert abs(privshape.mi_iid(xs, xs, binning) - 2.0) < 1e-9
    report = privshape.score_pair(xs, xs, binning)
    assert abs(report["entropy_x_bits"] - 2.0) < 1e-9
    assert report["k"] == 200

    flat = [2.5] * 200
    assert privshape.mi_iid(xs, flat, binning) < 1e-12
    assert privshape.mi_markov(xs, flat, binning) < 1e-9


def test_theory_checks_pass():
    checks = privshape.theory_checks(seed=7)
    assert len(checks) >= 10
    for c in checks:
        assert c["pass"], f"{c['name']}: {c['value']} vs {c['reference']}"


def test_generator_deterministic():
    a = privshape.generate_profile(seed=11, days=7)
    b = privshape.generate_profile(seed=11, days=7)
    assert a["x"] == b["x"]
    assert a["draws_5min"] == b["draws_5min"]
    assert max(a["x"]) == 5.22
    assert max(a["draws_5min"]) <= 112.0 + 1e-12


def test_config_roundtrip():
    cfg = privshape.standard_scenario()
    text = privshape.serialize_config(cfg)
    again = privshape.parse_config(text)
    assert privshape.serialize_config(again) == text
    assert again.has_ess() and again.has_ewh() and again.has_erh()


def test_short_scenario_run():
    cfg = privshape.standard_scenario()
    cfg.drop_ewh()
    cfg.drop_erh()
    cfg.days = 7
    cfg.mu = 5.0
    cfg.history_window = 24
    cfg.horizon = 12
    cfg.solver_eps = 1e-6
    cfg.node_limit = 40
    out = privshape.run_scenario(cfg)
    assert out["steps"] == 7 * 24
    assert out["audit_balance_error"] == 0.0
    assert out["audit_max_violation"] <= 1e-6
    assert out["iid_mi_bits"] <= out["entropy_x_bits"] + 1e-9
    assert math.isfinite(out["avg_daily_cost_cents"])
