"""Acceptance suite: one test per criterion, each printing a pass line with
its runtime against the stated budget.

Run with:  pytest tests/test_acceptance.py -v -s
"""

import time

import numpy as np
import pytest

from gridtrust import pipeline, sim
from gridtrust.design import Group, build_plan
from gridtrust.server import ExperimentService, write_export
from gridtrust.sim import Capability, Strategy, WorldConfig
from gridtrust.synth import (
    SimClock,
    SyntheticTrustParams,
    gen_trust_arimax,
    run_bot_cohort,
)
from gridtrust.ts import (
    ArimaOrder,
    TrustSeries,
    aic_grid,
    arimax_fit,
    arma_loglik,
    ols_fit,
    plan_exog,
    simulate_arma,
)

from oracles import mvn_arma_loglik

SEED = 20240512
W = WorldConfig()


def _report(name: str, t0: float, budget: float) -> None:
    elapsed = time.monotonic() - t0
    assert elapsed < budget, f"{name}: {elapsed:.1f}s exceeded the {budget:.0f}s budget"
    print(f"PASS {name}: {elapsed:.2f}s (budget {budget:.0f}s)")


def test_ols_group_mean_property(plan_g0):
    """Capability-only OLS coefficients equal per-capability trust means (1e-9)."""
    t0 = time.monotonic()
    exog = plan_exog(plan_g0)
    rng = np.random.default_rng(77)
    cohort = []
    for subject in range(8):
        latent = gen_trust_arimax(
            SyntheticTrustParams(beta=(0.35, 0.5, 0.68), phi=(0.5,), noise_sd=0.08),
            plan_g0,
            seed=100 + subject,
        ).values
        likert = np.rint(1 + 8 * latent)  # quantized onto the 1..9 scale
        cohort.append((likert - 1) / 8)
    series = TrustSeries(values=np.mean(cohort, axis=0), exog=exog, group=Group.G0)

    x, names = series.select_exog("capability")
    fit = ols_fit(series.values, x, names=names)
    labels = x.argmax(axis=1)
    means = np.array([series.values[labels == k].mean() for k in range(3)])
    assert np.max(np.abs(fit.coef - means)) < 1e-9
    _report("OLS group-mean property", t0, 1.0)


def test_likelihood_oracle():
    """arma_loglik vs explicit multivariate-normal oracle, (p,q) in {0,1,2}^2."""
    t0 = time.monotonic()
    params = {
        0: [()],
        1: [(0.6,)],
        2: [(0.5, -0.2)],
    }
    mparams = {
        0: [()],
        1: [(0.4,)],
        2: [(0.3, 0.25)],
    }
    rng = np.random.default_rng(5)
    worst = 0.0
    for p in range(3):
        for q in range(3):
            for phi in params[p]:
                for theta in mparams[q]:
                    for n in (10, 20):
                        y = rng.standard_normal(n)
                        for sigma2 in (0.7, 1.9):
                            ours = arma_loglik(y, np.array(phi), np.array(theta), sigma2)
                            oracle = mvn_arma_loglik(y, phi, theta, sigma2)
                            worst = max(worst, abs(ours - oracle))
    assert worst < 1e-6, f"worst likelihood deviation {worst:.2e}"
    _report(f"likelihood oracle (worst |diff| {worst:.1e})", t0, 10.0)


def test_parameter_recovery(plan_g0):
    """ARIMAX recovers known beta and phi within 3 SE in >=90% of 20 seeds."""
    t0 = time.monotonic()
    truth_beta = np.array([0.42, 0.52, 0.62])
    truth_phi = 0.6
    gen = SyntheticTrustParams(beta=tuple(truth_beta), phi=(truth_phi,), noise_sd=0.04)
    hits = 0
    for seed in range(20):
        series = gen_trust_arimax(gen, plan_g0, seed=500 + seed, n_trials=2000)
        fit = arimax_fit(series, ArimaOrder(1, 0, 0), seed=seed)
        beta_ok = np.all(np.abs(fit.beta - truth_beta) < 3 * fit.stderr[:3])
        phi_ok = abs(fit.phi[0] - truth_phi) < 3 * fit.stderr[3]
        hits += bool(beta_ok and phi_ok)
    assert hits >= 18, f"only {hits}/20 seeds recovered parameters within 3 SE"
    _report(f"parameter recovery ({hits}/20 seeds)", t0, 300.0)


def test_order_selection():
    """AIC prefers the true ARIMA(1,1,0) over (0,1,0) in >=95% of 20 seeds,
    and the d=1 grid returns a complete 5x5 table."""
    t0 = time.monotonic()
    wins = 0
    for seed in range(20):
        rng = np.random.default_rng(9000 + seed)
        dy = simulate_arma(rng.standard_normal(2000), np.array([0.8]), np.array([]))
        y = np.cumsum(dy)
        grid = aic_grid(y, [0, 1], [0], d=1, exog_columns="none", seed=seed, restarts=2)
        wins += grid.table[1, 0] < grid.table[0, 0]
    assert wins >= 19, f"AIC preferred the true order in only {wins}/20 seeds"

    rng = np.random.default_rng(31337)
    y = np.cumsum(simulate_arma(rng.standard_normal(300), np.array([0.8]), np.array([])))
    full = aic_grid(y, range(5), range(5), d=1, exog_columns="none", seed=1, restarts=2)
    assert full.table.shape == (5, 5)
    assert not np.any(np.isnan(full.table)), "grid table has missing cells"
    _report(f"order selection ({wins}/20 seeds, full 5x5 table)", t0, 300.0)


def test_qualitative_arimax_over_ols(plan_g0):
    """With autoregressive synthetic trust, ARIMAX one-step RMSE beats the
    OLS RMSE on the same series in >=95% of 40 seeds."""
    t0 = time.monotonic()
    gen = SyntheticTrustParams(beta=(0.40, 0.50, 0.62), phi=(0.7,), noise_sd=0.06)
    wins = 0
    for seed in range(40):
        series = gen_trust_arimax(gen, plan_g0, seed=3000 + seed)
        fit = arimax_fit(series, ArimaOrder(1, 0, 0), seed=seed, compute_stderr=False)
        x, names = series.select_exog("capability")
        ols = ols_fit(series.values, x, names=names)
        wins += fit.one_step_rmse < ols.rmse
    assert wins >= 38, f"ARIMAX beat OLS on only {wins}/40 seeds"
    _report(f"ARIMAX over OLS ({wins}/40 seeds)", t0, 300.0)


def test_simulation_determinism_and_timing():
    """Identical seeds give bit-identical trials; the sweep timing matches the
    80%-of-optimal design: optimal_encounter_time = 25.0s within 2%."""
    t0 = time.monotonic()
    for seed in (3, 99):
        cells = sim.place_outliers(seed, W)
        for strategy in Strategy:
            trial = sim.TrialConfig(9, seed, cells, strategy, Capability.C50)
            rng = np.random.default_rng(seed)
            keys = rng.integers(0, 16, size=600).astype(np.uint8)
            p1, o1 = sim.run_trial(trial, W, keys)
            p2, o2 = sim.run_trial(trial, W, keys)
            assert np.array_equal(p1.pos, p2.pos) and np.array_equal(p1.vel, p2.vel)
            assert np.array_equal(o1.as_path.pos, o2.as_path.pos)
            assert (o1.intersected_by_as, o1.reported_by_as) == (
                o2.intersected_by_as,
                o2.reported_by_as,
            )
    t_opt = sim.optimal_encounter_time(W)
    assert abs(t_opt - 25.0) / 25.0 < 0.02, f"optimal encounter time {t_opt:.3f}s"
    ratio = W.trial_duration / t_opt
    assert abs(ratio - 0.8) / 0.8 < 0.02, f"duration/optimal ratio {ratio:.4f}"
    _report(f"simulation determinism + timing (optimal {t_opt:.3f}s, ratio {ratio:.4f})", t0, 30.0)


def test_schedule_law():
    """1000 plans: 63 = 3x21, blocked-factor constancy per group, (7,7,7)
    balance, and identical schedules for subjects sharing (seed, group)."""
    t0 = time.monotonic()
    for i in range(500):
        for group in Group:
            plan = build_plan(i, group)
            assert len(plan.main_trials) == 63 and len(plan.blocks) == 3
            assert all(len(b) == 21 for b in plan.blocks)
            for block in plan.blocks:
                if group is Group.G0:
                    assert len({t.strategy for t in block}) == 1
                    counts = [sum(t.capability is c for t in block) for c in Capability]
                else:
                    assert len({t.capability for t in block}) == 1
                    counts = [sum(t.strategy is s for t in block) for s in Strategy]
                assert counts == [7, 7, 7]
            if i % 100 == 0:
                assert build_plan(i, group) == plan  # shared-seed subjects agree
    _report("schedule law (1000 plans)", t0, 30.0)


def test_end_to_end_bots(tmp_path):
    """20 bot sessions -> export -> exclude -> 63-trial series -> full
    analysis report with all four table kinds rendered."""
    t0 = time.monotonic()
    clock = SimClock()
    service = ExperimentService(tmp_path / "data", SEED, clock=clock)
    records = run_bot_cohort(service, 20, base_seed=6, clock=clock)
    assert sum(r.group is Group.G0 for r in records) == 10
    assert sum(r.group is Group.G1 for r in records) == 10
    assert all(r.status.value == "Complete" for r in records)

    export = tmp_path / "export.jsonl"
    n_records = write_export(service, export)
    assert n_records == 20 * (1 + 72)

    sessions = pipeline.ingest(export)
    kept, excluded = pipeline.exclude(sessions)
    assert len(kept) == 20 and excluded == []

    series = {}
    for group in Group:
        series[group] = pipeline.build_series(kept, group, build_plan(SEED, group))
        assert len(series[group]) == 63

    report = pipeline.run_analysis(
        series[Group.G0], series[Group.G1], p_range=range(5), q_range=range(5), d=1, seed=0
    )
    assert report.rmse_matrix.shape == (2, 2)
    assert np.all(np.isfinite(report.rmse_matrix))

    files = {f.name for f in pipeline.render_tables(report, tmp_path / "tables")}
    for tag in ("group0", "group1"):
        for kind in ("ols", "aic", "arimax"):
            assert f"{kind}_{tag}.csv" in files and f"{kind}_{tag}.txt" in files
    assert "rmse_matrix.csv" in files and "rmse_matrix.txt" in files
    orders = [g.aic.selected.as_tuple() for g in report.groups]
    _report(f"end-to-end bots (selected orders {orders})", t0, 600.0)
