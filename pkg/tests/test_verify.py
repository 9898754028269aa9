import json

import numpy as np
import pytest

from netspread import verify as V
from netspread.master_exact import solve_exact
from netspread.networks import CompleteNetwork, GeneralNetwork
from netspread.schedules import RateSchedule

GRID = np.linspace(0.0, 4.0, 9)


def test_bounds_examples():
    assert V.check_bounds("complete", 5, V.schedule_params({"p": 1.0, "q": 2.0, "I0": 0.0}), GRID).passed
    assert V.check_bounds("circle", 6, V.schedule_params({"p": 1.0, "qL": 1.0, "qR": 1.0, "I0": 0.0}), GRID).passed


def test_lower_bound_at_zero_is_I0():
    params = V.schedule_params({"p": 1.0, "q": 2.0, "I0": 0.3})
    assert V.lower_bound("complete", params, np.array([0.0]))[0] == pytest.approx(0.3)


def test_survival_bound_equality_without_influence():
    net = GeneralNetwork(4, [0.1, 0.2, 0.3, 0.4], {}, [0.0, 0.1, 0.2, 0.3]).materialize()
    r = V.check_survival_bound(net, GRID)
    assert r.passed and abs(r.details["min_slack"]) < 1e-10


def test_survival_bound_single_node():
    r = V.check_survival_bound(GeneralNetwork(1, 0.5, {}, 0.2).materialize(), GRID)
    assert r.passed and abs(r.details["min_slack"]) < 1e-10


def test_survival_bound_strict_with_influence():
    net = V.random_networks(count=1)[0]
    assert V.check_survival_bound(net, GRID).passed
    # a node with an incoming edge survives strictly less often than with p alone
    j = next(j for (k, j) in net.q)
    S = solve_exact(net, GRID, 1e-12, 1e-14, keep_states=True).states[1:, (1 << j) - 1]
    alone = (1 - net.I0[j]) * np.exp(-np.array([net.p[j].antiderivative(t) for t in GRID[1:]]))
    assert np.all(alone - S > 1e-6)


def test_si_bass_examples():
    q = RateSchedule.piecewise_constant([1.0], [1.0, 2.0])
    assert V.check_si_bass_equivalence(10, RateSchedule.constant(1.0), 0.2, GRID).passed
    assert V.check_si_bass_equivalence(4, q, 0.5, GRID).passed
    assert V.check_si_bass_equivalence(6, RateSchedule.constant(1.0), 0.0, GRID).passed


def test_si_bass_needs_whole_node_counts():
    with pytest.raises(ValueError):
        V.check_si_bass_equivalence(5, RateSchedule.constant(1.0), 0.5, GRID)


def test_independent_seeding_is_only_approximate():
    f_si, rhs, f_ind = V.si_bass_sides(10, RateSchedule.constant(1.0), 0.2, GRID)
    assert np.abs(f_si - rhs).max() < 1e-8
    assert np.abs(f_ind - rhs).max() > 1e-3


def test_reduction_cases_pass():
    for fam, M, params in V.reduction_cases():
        assert V.check_exact_vs_reduced(fam, M, params, GRID).passed


def test_monotone_detects_wrong_order():
    params = V.sweep_params()["complete"]
    assert V.check_monotone_in_M("complete", [2, 10], params, V.SUITE_GRID).passed
    with pytest.raises(ValueError):
        V.check_monotone_in_M("complete", [10, 2], params, V.SUITE_GRID)


def test_convergence_report_fields():
    r = V.check_limit_convergence("circle", [2, 4], V.sweep_params()["circle"], V.SUITE_GRID)
    assert r.passed and r.details["min_gap"] > 0


def test_report_is_json_and_digest_stable():
    params = V.sweep_params(True)["complete"]
    r = V.check_bounds("complete", 2, params, V.SUITE_GRID)
    json.dumps(r.as_dict())
    assert r.digest == V.check_bounds("complete", 2, V.sweep_params(True)["complete"], V.SUITE_GRID).digest


def test_time_dependent_parameters():
    p, q = V.time_dependent("p", 0.1), V.time_dependent("q", 1.0)
    assert p.eval(0) == 0.1 and p.eval(5) == pytest.approx(0.2) and p.eval(9) == pytest.approx(0.2)
    assert q.eval(0.99) == 1.0 and q.eval(1.0) == 2.0


def test_single_suite_selection():
    reports = V.run_suite("reduction", time_dep=(False,))
    assert reports and all("/reduction/" in r.name for r in reports)
    assert all(r.passed for r in reports)


@pytest.mark.slow
def test_default_suite_passes():
    reports = V.run_suite()
    assert all(r.passed for r in reports), [r.name for r in reports if not r.passed]
