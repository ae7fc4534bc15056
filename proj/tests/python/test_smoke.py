import itertools
import math
from pathlib import Path

import numpy as np
import pytest

import qrebal

ROOT = Path(__file__).resolve().parents[2]


def test_version():
    assert qrebal.__version__ == "0.1.0"


def test_ising_matches_qubo():
    rng = np.random.default_rng(1)
    a = rng.uniform(-1, 1, (5, 5))
    q = (a + a.T) / 2
    model = qrebal.to_ising(q)
    for x in range(32):
        bits = np.array([(x >> i) & 1 for i in range(5)], dtype=float)
        assert model.energy(x) == pytest.approx(bits @ q @ bits, abs=1e-12)
        assert qrebal.qubo_energy(q, x) == pytest.approx(bits @ q @ bits, abs=1e-12)


def test_brute_force_is_minimum():
    rng = np.random.default_rng(2)
    a = rng.uniform(-1, 1, (4, 4))
    q = (a + a.T) / 2
    best = qrebal.brute_force(q)
    energies = [qrebal.qubo_energy(q, x) for x in range(16)]
    assert best.energy == pytest.approx(min(energies))


def test_qaoa_runs_and_is_seeded():
    rng = np.random.default_rng(3)
    a = rng.uniform(-1, 1, (4, 4))
    q = (a + a.T) / 2
    cfg = qrebal.QaoaConfig()
    cfg.restarts = 2
    cfg.seed = 11
    one = qrebal.optimise_angles(q, cfg)
    two = qrebal.optimise_angles(q, cfg)
    assert one.histogram == two.histogram
    assert sum(one.histogram.values()) == cfg.eval_shots
    assert len(one.gammas) == cfg.depth


def test_candidate_dates():
    assert qrebal.candidate_dates(83, 8) == [9, 18, 28, 37, 46, 55, 65, 74]


def test_minvar_diagonal():
    w = qrebal.minvar(np.diag([1.0, 4.0]))
    assert w == pytest.approx([0.8, 0.2], abs=1e-15)


def test_ledoit_wolf_alpha_in_range():
    rng = np.random.default_rng(4)
    est = qrebal.ledoit_wolf(0.01 * rng.standard_normal((120, 6)))
    assert 0.0 <= est["alpha"] <= 1.0
    assert est["sigma"].shape == (6, 6)


def test_ga_beats_equal_weight():
    corr = np.eye(4)
    prices = qrebal.synth_panel(5, 253, corr, np.full(4, 0.2), np.array([0.02, 0.05, 0.1, 0.15]))
    gross = prices[1:] / prices[:-1]
    w, fitness, history = qrebal.ga_optimise(gross, population=60, generations=30, seed=1)
    assert w.sum() == pytest.approx(1.0)
    assert all(b >= a for a, b in zip(history, history[1:]))


def test_backtest_constant_returns():
    gross = np.full((249, 3), 1.001)
    report = qrebal.backtest(gross, np.full(3, 1 / 3))
    assert report["equity_curve"][-1] == pytest.approx(1.001**249, rel=1e-12)
    daily = qrebal.backtest(gross, np.full(3, 1 / 3), {"periodic": 1})
    assert daily["rebalance_count"] == 248
    assert daily["total_cost_bp"] == 0.0


def test_worked_rebalance_cost():
    gross = np.array([[1.0, 1.0], [2.0, 1.0], [1.0, 1.0]])
    report = qrebal.backtest(gross, np.array([0.5, 0.5]), [0, 0, 1], cost_c=0.001)
    assert report["total_cost_bp"] / 1e4 == pytest.approx(0.001 / 3, abs=1e-12)


def test_walk_forward_shapes():
    rng = np.random.default_rng(6)
    gross = np.exp(0.01 * rng.standard_normal((60, 3)))
    cfg = qrebal.QaoaConfig()
    cfg.restarts = 1
    cfg.opt_shots = 256
    cfg.eval_shots = 512
    cfg.max_iters = 30
    out = qrebal.walk_forward(gross, np.full(3, 1 / 3), windows=2, candidates=4, config=cfg)
    assert len(out["schedule"]) == 60
    assert len(out["outcomes"]) == 2
    assert out["rebalances"] == sum(out["schedule"])


def test_missing_config_is_validation_error(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("prices = nowhere.csv\ntrain_end = 2020-01-01\ntest_end = 2020-06-01\n")
    with pytest.raises(qrebal.ValidationError):
        qrebal.run_pipeline(str(cfg), str(tmp_path / "out"))
