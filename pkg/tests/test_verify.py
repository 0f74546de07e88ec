import numpy as np
import pytest

from hilbertdyn.config import ExperimentConfig, dumps, task_rng
from hilbertdyn.geometry import unit_square
from hilbertdyn.metrics import MetricInstance
from hilbertdyn.verify import (
    FAIL,
    PASS,
    SUITES,
    CheckReport,
    EuclideanMetric,
    ScaledMetric,
    SquaredMetric,
    WarpedEuclidean,
    alternating_map,
    check_axiom2star,
    check_axiom4,
    check_ch_combinatorics,
    check_condition_C,
    check_metric_axioms,
    run_suite,
    suite_names,
)

SMALL = {"samples": {"condition_c": 3000, "axiom5": 3000, "kobayashi": 2000, "metric_axioms": 2000,
                     "consistency": 2000, "nonexpansive": 2000}}


def test_suite_names():
    assert set(suite_names()) == set(SUITES) | {"all"}
    assert len(SUITES) == 15


@pytest.mark.parametrize("suite", ["condition-C", "axiom5", "kobayashi-bound", "metric-axioms", "hilbert-consistency",
                                   "ch-combinatorics", "lemma-a3", "horoball-star", "lemma-a3prime", "axiom2star"])
def test_fast_suites_pass_with_flagged_controls(suite):
    rep = run_suite(suite, ExperimentConfig(SMALL), 3)
    assert rep.status == PASS, [(c.check_name, c.status) for c in rep.checks]
    assert rep.exit_code == 0
    neg = [c for c in rep.checks if c.negative_control]
    assert neg and all(c.status == FAIL and c.n_violations >= 1 for c in neg)
    assert all(c.status == PASS for c in rep.checks if not c.negative_control)


def test_report_fields():
    rep = run_suite("ch-combinatorics", ExperimentConfig(), 9)
    d = rep.to_dict()
    assert d["seed"] == 9 and d["suite"] == "ch-combinatorics"
    for c in d["checks"]:
        assert {"check_name", "status", "n_samples", "n_violations", "worst_margin", "seed", "config_digest",
                "justification", "negative_control", "task"} <= set(c)
        assert c["config_digest"] == ExperimentConfig().digest


def test_seed_changes_samples_but_not_verdict():
    a = run_suite("metric-axioms", ExperimentConfig(SMALL), 1)
    b = run_suite("metric-axioms", ExperimentConfig(SMALL), 2)
    assert a.status == b.status == PASS
    assert dumps(a.to_dict()) != dumps(b.to_dict())


def test_violation_gives_exit_1():
    cfg = ExperimentConfig({**SMALL, "metric_tol": -1.0})
    rep = run_suite("metric-axioms", cfg, 0)
    assert rep.status == FAIL and rep.exit_code == 1


def test_inconclusive_gives_exit_2():
    cfg = ExperimentConfig({"map": "perron-2", "n_steps": 500})
    rep = run_suite("wolff-denjoy", cfg, 0)
    assert rep.status == "inconclusive" and rep.exit_code == 2


def test_negative_control_that_passes_fails_the_suite():
    r = CheckReport("x", PASS, 1, 0, -1.0, negative_control=True)
    assert not r.ok
    r = CheckReport("x", FAIL, 1, 1, 1.0, negative_control=True)
    assert r.ok


def test_stand_in_metrics():
    sq = unit_square()
    rng = task_rng(0, 0)
    assert check_condition_C(WarpedEuclidean(sq), 5000, rng).status == FAIL
    assert check_condition_C(EuclideanMetric(sq), 5000, rng).status == PASS
    assert check_metric_axioms(SquaredMetric(MetricInstance(sq)), 3000, rng).status == FAIL
    assert check_metric_axioms(ScaledMetric(MetricInstance(sq), 0.25), 3000, rng).status == PASS
    assert check_axiom2star(EuclideanMetric(sq), 20, rng).status == FAIL
    assert check_axiom2star(MetricInstance(sq), 20, rng).status == PASS


def test_alternating_map_breaks_axiom4():
    rep = check_axiom4(None, alternating_map(), [0.0, 0.1], ExperimentConfig())
    assert rep.status == FAIL


def test_ch_check_rejects_wrong_membership():
    rep = check_ch_combinatorics(ExperimentConfig(), lambda p: bool(p[0] == 1.0 and p[1] == 0.0))
    assert rep.status == FAIL


def test_task_rng_independent_of_order():
    a = [task_rng(5, i).uniform() for i in range(4)]
    b = [task_rng(5, i).uniform() for i in reversed(range(4))][::-1]
    assert a == b
    assert len(set(a)) == 4


def test_config_body_override():
    cfg = ExperimentConfig({**SMALL, "body": {"type": "ellipsoid", "center": [0, 0], "shape": [[1, 0], [0, 2]]}})
    rep = run_suite("condition-C", cfg, 0)
    names = [c.check_name for c in rep.checks]
    assert rep.status == PASS
    assert any("ellipsoid" in n or "config" in n for n in names)


def test_threads_do_not_change_report():
    cfg = ExperimentConfig(SMALL)
    a = dumps(run_suite("axiom5", cfg, 4, threads=1).to_dict())
    b = dumps(run_suite("axiom5", cfg, 4, threads=3).to_dict())
    assert a == b
    assert np.isfinite(run_suite("axiom5", cfg, 4).checks[0].worst_margin)
