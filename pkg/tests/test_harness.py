import numpy as np
import pytest

from policyshift import (
    ExperimentConfig,
    LearnerConfig,
    NuisanceConfig,
    SimConfig,
    evaluate_policy,
    generate,
    run_replication,
    run_sweep,
    run_table,
    write_sweep_csv,
    write_table_csv,
)
from policyshift.features import FeatureMap
from policyshift.harness import METRIC_NAMES
from policyshift.policy import LinearPolicy


def small_config(seed=0, **sim_kwargs):
    sim = SimConfig(n_source=48, n_target=96, seed=seed, **sim_kwargs)
    return ExperimentConfig(sim=sim, learner=LearnerConfig(max_epochs=12, batch_size=48))


def test_null_policy_metrics():
    sim = generate(SimConfig(n_source=32, n_target=64, seed=1))
    never = LinearPolicy(theta=np.array([-1.0, 0.0, 0.0, 0.0]), fmap=FeatureMap("raw", 3))
    metrics = evaluate_policy(never, sim)
    tgt = sim.dataset.target_mask
    assert metrics.true_reward == pytest.approx(sim.potential.y0[tgt].mean(), rel=1e-12)
    assert metrics.welfare_change == 0.0
    assert evaluate_policy(never, sim, welfare_scope="target").welfare_change == 0.0


def test_oracle_policy_has_zero_regret():
    sim = generate(SimConfig(n_source=32, n_target=64, seed=2))
    metrics = evaluate_policy(sim.oracle, sim)
    assert metrics.regret == 0.0
    assert metrics.policy_error == 0.0


def test_welfare_scope_changes_the_sum():
    sim = generate(SimConfig(n_source=32, n_target=64, seed=3))
    always = LinearPolicy(theta=np.array([1.0, 0.0, 0.0, 0.0]), fmap=FeatureMap("raw", 3))
    all_rows = evaluate_policy(always, sim, welfare_scope="all").welfare_change
    target_rows = evaluate_policy(always, sim, welfare_scope="target").welfare_change
    assert all_rows == pytest.approx(float(sim.potential.effect.sum()), rel=1e-12)
    assert target_rows == pytest.approx(float(sim.potential.effect[sim.dataset.target_mask].sum()), rel=1e-12)
    assert all_rows != target_rows
    with pytest.raises(ValueError, match="welfare_scope"):
        evaluate_policy(always, sim, welfare_scope="source")


def test_run_replication_records_all_methods():
    record = run_replication(small_config(seed=5), replication=3)
    assert record["seed"] == 8
    assert set(record["methods"]) == {"direct", "ipw", "se"}
    for entry in record["methods"].values():
        assert set(entry["metrics"]) == set(METRIC_NAMES)
        assert len(entry["theta"]) == 4
    assert set(record["nuisance_coefficients"]) == {"mu0", "mu1", "e1", "s"}


def test_run_table_aggregates_are_recomputable():
    report = run_table(small_config(seed=9), replications=3)
    for method in report.methods:
        series = report.metric_series(method, "true_reward")
        assert len(series) == report.completed[method] == 3
        agg = report.aggregates[method]["true_reward"]
        assert agg["mean"] == pytest.approx(float(series.mean()), rel=0, abs=0)
        assert agg["sd"] == pytest.approx(float(series.std(ddof=1)), rel=0, abs=0)
    # relative improvement follows (method - direct) / direct exactly
    direct_mean = report.aggregates["direct"]["true_reward"]["mean"]
    for method in ("ipw", "se"):
        expected = (report.aggregates[method]["true_reward"]["mean"] - direct_mean) / direct_mean
        assert report.relative_improvement[method]["true_reward"] == pytest.approx(expected, rel=0, abs=0)
        assert set(report.paired_t_tests[method]) == set(METRIC_NAMES)
        assert 0.0 <= report.paired_t_tests[method]["true_reward"]["p_value"] <= 1.0


def test_run_table_is_deterministic_and_worker_invariant():
    config = small_config(seed=21)
    first = run_table(config, replications=3).to_json()
    second = run_table(config, replications=3).to_json()
    assert first == second
    parallel = run_table(config, replications=3, workers=4).to_json()
    assert parallel == first


def test_run_table_single_method_has_no_baseline_comparisons():
    report = run_table(small_config(seed=11), replications=2, methods=("direct",))
    assert report.relative_improvement == {}
    assert report.paired_t_tests == {}


def test_run_table_validates_inputs():
    with pytest.raises(ValueError, match="replications"):
        run_table(small_config(), replications=1)
    with pytest.raises(ValueError, match="unknown methods"):
        run_table(small_config(), replications=2, methods=("direct", "magic"))


def test_failed_replication_is_recorded_not_raised():
    # 3 source rows cannot support the default outcome maps
    config = ExperimentConfig(sim=SimConfig(n_source=3, n_target=16, seed=1), learner=LearnerConfig(max_epochs=2, batch_size=8))
    report = run_table(config, replications=2)
    assert all("error" in rec for rec in report.replications)
    assert report.completed == {"direct": 0, "ipw": 0, "se": 0}
    assert report.aggregates["se"]["true_reward"]["mean"] is None


def test_shift_sweep_at_zero_equals_no_shift_table():
    config = small_config(seed=13)
    sweep = run_sweep("shift", (0.0,), config, replications=2)
    assert len(sweep) == 1 and sweep[0][0] == 0.0
    from dataclasses import replace

    no_shift = replace(config, sim=replace(config.sim, mu_target=config.sim.mu_source))
    table = run_table(no_shift, replications=2)
    assert sweep[0][1].aggregates == table.aggregates


def test_treatment_sweep_at_zero_equals_default_table():
    config = small_config(seed=14)
    sweep = run_sweep("treatment", (0.0,), config, replications=2)
    assert sweep[0][1].aggregates == run_table(config, replications=2).aggregates


def test_sweep_csv_row_count(tmp_path):
    config = small_config(seed=15)
    results = run_sweep("shift", (0.0, 1.0), config, replications=2)
    path = tmp_path / "sweep.csv"
    write_sweep_csv(results, path)
    lines = path.read_text(encoding="utf-8").strip().splitlines()
    assert len(lines) - 1 == 2 * 3 * len(METRIC_NAMES)


def test_sweep_validates_inputs():
    with pytest.raises(ValueError, match="kind"):
        run_sweep("noise", (0.0,), small_config(), replications=2)
    with pytest.raises(ValueError, match="grid"):
        run_sweep("shift", (), small_config(), replications=2)


def test_table_csv_long_format(tmp_path):
    report = run_table(small_config(seed=16), replications=2)
    path = tmp_path / "table.csv"
    write_table_csv(report, path)
    lines = path.read_text(encoding="utf-8").strip().splitlines()
    assert lines[0] == "replication,method,metric,value"
    assert len(lines) - 1 == 2 * 3 * len(METRIC_NAMES)


def test_config_round_trips_through_dict():
    config = ExperimentConfig(
        sim=SimConfig(n_source=10, n_target=20, seed=3, beta_treatment=0.2),
        nuisance=NuisanceConfig(outcome_map="quadratic", clip=0.02),
        learner=LearnerConfig(max_epochs=7, standardize=False),
        welfare_scope="target",
    )
    assert ExperimentConfig.from_dict(config.to_dict()) == config
    with pytest.raises(ValueError, match="unknown config sections"):
        ExperimentConfig.from_dict({"simulation": {}})
