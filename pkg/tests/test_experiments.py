"""Sweep harness: seeding, aggregation, intervals, CSV, selftest."""

import math

import numpy as np
import pytest

from phasemax import (
    COMPLEX,
    GAUSSIAN,
    RANDOM,
    REAL,
    TRUNCATED_SPECTRAL,
    SweepConfig,
    SweepRow,
    SweepTable,
    alpha_of_beta,
    default_m_grid,
    phasemax_success_bound,
    run_sweep,
    run_trial,
    selftest,
    wilson_interval,
)


def test_wilson_interval_matches_direct_formula():
    z = 1.96
    for successes, trials in [(0, 6), (3, 10), (50, 50), (30, 100)]:
        p = successes / trials
        denom = 1.0 + z * z / trials
        center = (p + z * z / (2 * trials)) / denom
        half = (z / denom) * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials**2))
        lo, hi = wilson_interval(successes, trials)
        assert lo == pytest.approx(max(0.0, center - half), abs=1e-15)
        assert hi == pytest.approx(min(1.0, center + half), abs=1e-15)
        assert 0.0 <= lo <= p <= hi <= 1.0


def test_wilson_interval_is_symmetric_under_complement():
    lo, hi = wilson_interval(7, 25)
    lo_c, hi_c = wilson_interval(18, 25)
    assert lo == pytest.approx(1.0 - hi_c, abs=1e-14)
    assert hi == pytest.approx(1.0 - lo_c, abs=1e-14)


def test_wilson_interval_validation():
    with pytest.raises(ValueError):
        wilson_interval(1, 0)
    with pytest.raises(ValueError):
        wilson_interval(5, 3)


def test_wilson_interval_nominal_coverage():
    # at n=50, p=0.3 the 95% interval should cover p in roughly 95% of draws
    rng = np.random.default_rng(301)
    p, trials, reps = 0.3, 50, 1000
    covered = 0
    for k in rng.binomial(trials, p, size=reps):
        lo, hi = wilson_interval(int(k), trials)
        covered += lo <= p <= hi
    assert 0.92 <= covered / reps <= 0.98


def test_alpha_of_beta_values():
    assert alpha_of_beta(0.0) == 1.0
    assert alpha_of_beta(math.pi / 4) == pytest.approx(0.5)
    assert alpha_of_beta(math.pi / 2) == pytest.approx(0.0)


def test_default_m_grid():
    grid = default_m_grid(100)
    assert grid[0] == 400
    assert grid[-1] == 1400
    assert grid[1] - grid[0] == 50
    small = default_m_grid(12)
    assert small[0] == 48 and small[-1] == 168
    assert small[1] - small[0] == 6


def test_sweep_config_validation_and_defaults():
    cfg = SweepConfig(n=10)
    assert cfg.m_grid == default_m_grid(10)
    with pytest.raises(ValueError):
        SweepConfig(method="lasso")
    with pytest.raises(ValueError):
        SweepConfig(anchor="psychic")
    with pytest.raises(ValueError):
        SweepConfig(trials_per_cell=0)
    with pytest.raises(ValueError):
        SweepConfig(workers=0)
    with pytest.raises(ValueError):
        SweepConfig(beta_list=())


def _tiny_cfg(**kw):
    base = dict(
        n=8,
        beta_list=(math.radians(30.0),),
        m_grid=(64,),
        trials_per_cell=4,
        seed=9,
    )
    base.update(kw)
    return SweepConfig(**base)


def test_run_trial_is_deterministic():
    cfg = _tiny_cfg()
    cell = (cfg.beta_list[0], 64)
    a = run_trial(cfg, cell, 0)
    b = run_trial(cfg, cell, 0)
    assert a.seed == b.seed
    assert a.rre == b.rre
    assert a.iterations == b.iterations
    assert a.success == b.success
    assert a.converged == b.converged
    c = run_trial(cfg, cell, 1)
    assert c.seed != a.seed


def test_run_sweep_row_invariants():
    cfg = _tiny_cfg(m_grid=(40, 64), trials_per_cell=5)
    table = run_sweep(cfg)
    assert len(table.rows) == 2
    for row in table.rows:
        assert row.trials == 5
        assert 0 <= row.successes <= row.trials
        assert row.rate == row.successes / row.trials
        lo, hi = wilson_interval(row.successes, row.trials)
        assert (row.wilson_lo, row.wilson_hi) == (lo, hi)
        expected = phasemax_success_bound(
            row.m, cfg.n, alpha_of_beta(math.radians(row.beta_deg)), cfg.field
        )
        assert row.theory_bound == pytest.approx(expected.value, abs=1e-12)
    # 8x oversampling at beta=30 degrees recovers reliably
    assert table.rows[-1].rate == 1.0


def test_run_sweep_csv_round_trip(tmp_path):
    cfg = _tiny_cfg(trials_per_cell=3)
    out = tmp_path / "rates.csv"
    table = run_sweep(cfg, out_csv=str(out))
    text = out.read_text()
    assert SweepTable.from_csv(text) == table
    assert SweepTable.from_csv(table.to_csv()) == table


def test_sweep_table_rejects_malformed_text():
    with pytest.raises(ValueError, match="header"):
        SweepTable.from_csv("nope\n1,2,3")
    good = SweepTable((SweepRow(45.0, 10, 2, 1, 0.5, 0.1, 0.9, 0.0),))
    broken = good.to_csv().replace("\n45", "\n45,9")
    with pytest.raises(ValueError, match="malformed"):
        SweepTable.from_csv(broken)


def test_worker_pool_matches_serial_fold():
    cfg_serial = _tiny_cfg(n=6, m_grid=(36,), trials_per_cell=4)
    cfg_pool = _tiny_cfg(n=6, m_grid=(36,), trials_per_cell=4, workers=2)
    assert run_sweep(cfg_serial).rows == run_sweep(cfg_pool).rows


def test_bp_and_gs_methods_run_through_the_harness():
    bp = run_sweep(_tiny_cfg(method="bp", trials_per_cell=3))
    assert bp.rows[0].rate == 1.0
    gs = run_sweep(_tiny_cfg(method="gs", trials_per_cell=3))
    assert gs.rows[0].rate == 1.0


def test_random_anchor_policy_runs():
    cfg = _tiny_cfg(anchor=RANDOM, trials_per_cell=3)
    table = run_sweep(cfg)
    assert table.rows[0].trials == 3  # rates vary; the plumbing must not


def test_spectral_anchor_with_reserved_prefix():
    cfg = _tiny_cfg(
        n=10,
        m_grid=(120,),
        anchor=TRUNCATED_SPECTRAL,
        init_m=40,
        ensemble_kind=GAUSSIAN,
        trials_per_cell=3,
    )
    cell = (cfg.beta_list[0], 120)
    rec = run_trial(cfg, cell, 0)
    again = run_trial(cfg, cell, 0)
    assert rec.rre == again.rre
    assert rec.rre is not None


def test_real_field_sweep():
    cfg = _tiny_cfg(field=REAL, m_grid=(56,), trials_per_cell=3)
    table = run_sweep(cfg)
    assert table.rows[0].rate == 1.0
    expected = phasemax_success_bound(56, 8, alpha_of_beta(cfg.beta_list[0]), REAL)
    assert table.rows[0].theory_bound == pytest.approx(expected.value)


def test_selftest_passes_clean(capsys):
    result = selftest()
    out = capsys.readouterr().out
    assert result["ok"] is True
    assert len(result["items"]) == 10
    assert all(item["ok"] for item in result["items"])
    assert out.count("[PASS]") == 10
    assert "[FAIL]" not in out


def test_selftest_catches_a_doctored_bound(capsys):
    def doctored(m, n, alpha, field):
        return phasemax_success_bound(m, 0.75 * n, alpha, field)

    result = selftest(success_bound=doctored)
    out = capsys.readouterr().out
    assert result["ok"] is False
    bad = [item for item in result["items"] if not item["ok"]]
    assert len(bad) >= 1
    assert "[FAIL]" in out
