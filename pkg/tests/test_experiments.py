import pytest

from inducedtrees.experiments import (
    ConfigError,
    ExperimentConfig,
    SweepResult,
    SweepRow,
    make_tree,
    maxima_csv,
    run_containment,
    run_exact_maxima,
    run_threshold_sweep,
)
from inducedtrees.search import CapExceeded


def test_config_validation():
    with pytest.raises(ConfigError, match="p"):
        ExperimentConfig(n=10, p=None)
    with pytest.raises(ConfigError, match="tree_family"):
        ExperimentConfig(n=10, p=0.5, tree_family="bush")
    with pytest.raises(ConfigError, match="b"):
        ExperimentConfig(n=10, p=0.5, b=11)
    assert ExperimentConfig(n=10**4, p_law="sqrt-law").edge_p == pytest.approx(0.117874, rel=1e-5)


def test_default_b_follows_threshold():
    assert ExperimentConfig(n=2000, p=0.05).default_b() == 92
    with pytest.raises(ConfigError):
        ExperimentConfig(n=100, p=0.01).default_b()


def test_tree_is_shared_across_trials_and_seeds_fix_it():
    cfg = ExperimentConfig(n=100, p=0.1, seed=5)
    assert make_tree(cfg, 20) == make_tree(cfg, 20)
    assert make_tree(cfg, 20).max_degree <= 3


def test_containment_thread_invariance():
    cfg = ExperimentConfig(n=150, p=0.1, b=12, trials=8, seed=2)
    one = run_containment(cfg).to_csv()
    two = run_containment(ExperimentConfig(n=150, p=0.1, b=12, trials=8, seed=2, threads=3)).to_csv()
    assert one == two


def test_planted_sweep_succeeds():
    cfg = ExperimentConfig(n=200, p=0.1, trials=5, seed=1, planted=True, tree_family="caterpillar")
    res = run_threshold_sweep(cfg, [5, 10, 15])
    assert [r.b for r in res.rows] == [5, 10, 15]
    assert all(r.success_rate == 1.0 for r in res.rows)
    assert all(r.wall_time_ms is None for r in res.rows)


def test_timing_only_on_request():
    cfg = ExperimentConfig(n=50, p=0.2, b=4, trials=2, record_timing=True)
    assert run_containment(cfg).rows[0].wall_time_ms is not None


def test_sweep_rejects_out_of_range_b():
    with pytest.raises(ConfigError):
        run_threshold_sweep(ExperimentConfig(n=20, p=0.2, trials=1), [1, 5])


def test_monotonicity_flags():
    rows = [SweepRow(100, 0.1, b, 100, s, s / 100, 1.0, None, 0) for b, s in [(5, 50), (6, 90), (7, 91)]]
    assert SweepResult(rows).monotonicity_flags() == [6]


def test_exact_maxima_rows():
    rows = run_exact_maxima(9, 0.5, 6, seed=3)
    assert [r.family for r in rows] == ["tree", "path", "matching"]
    assert rows[1].max <= rows[0].max
    assert maxima_csv(rows).count("\n") == 4
    with pytest.raises(CapExceeded):
        run_exact_maxima(20, 0.5, 1)
