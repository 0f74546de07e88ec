import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

# test function name -> acceptance criterion label
CRITERIA = {
    "test_c01_hilbert_consistency": "1  cross-ratio vs cone formula on Simplex{2}, Simplex{3}",
    "test_c02_metric_axioms": "2  symmetry and triangle inequality on four instances",
    "test_c03_condition_c": "3  condition (C) with a non-convex negative control",
    "test_c04_axiom5_bound": "4  2 log(1 + |x - y| / diam) lower bound on the square",
    "test_c05_kobayashi_bound": "5  arctanh lower bound on disc and bidisc",
    "test_c06_denjoy_wolff_discrete": "6  parabolic map: uniform convergence to (1, 0)",
    "test_c07_denjoy_wolff_semigroup": "7  nilpotent semigroup: uniform convergence to (1, 0)",
    "test_c08_bounded_regime": "8  Perron map bounded, fixed point (1/2, 1/2)",
    "test_c09_attractor_inclusions": "9  omega points in ch(xi) and ch(ch(xi)) for the Jordan map",
    "test_c10_ch_combinatorics": "10 ch / ch(ch) on the unit square",
    "test_c11_horoball_star": "11 horoball star shape and 1-D closed form",
    "test_c12_lemma_a3_shrink": "12 nested horoball traces shrink to a point",
    "test_c13_semigroup_attractor": "13 skeleton and dense-time attractors agree",
    "test_c14_nonexpansive": "14 shipped maps nonexpansive, step distances nonincreasing",
    "test_c15_determinism": "15 byte-identical verify reports",
}

_outcomes: dict = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.split("::")[-1].split("[")[0]
    if name not in CRITERIA or "test_acceptance" not in report.nodeid:
        return
    if report.when == "call" or report.failed:
        prev = _outcomes.get(name, "PASS")
        _outcomes[name] = "FAIL" if (report.failed or prev == "FAIL") else "PASS"


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for name, label in CRITERIA.items():
        if name in _outcomes:
            terminalreporter.write_line(f"criterion {label}: {_outcomes[name]}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
