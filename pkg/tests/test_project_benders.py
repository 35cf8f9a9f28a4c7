import numpy as np
import pytest

from groupcs import GroupModel, brute_force_projection, dp_project
from groupcs.project_benders import (
    OptimalityCut,
    benders_project,
    master_solve,
    selection_value,
    subproblem_closed_form,
)
from conftest import random_model


def test_subproblem_quad_example(quad_model, quad_weights):
    model = quad_model(1, 2)
    dual = subproblem_closed_form(model, [0, 1, 0, 0], quad_weights)
    assert dual.alpha == 1.0
    assert np.array_equal(dual.beta, [0, 0, 0, 9])
    assert np.array_equal(dual.gamma, [3, 0, 1, 0])


def test_subproblem_full_and_empty(quad_model, quad_weights):
    model = quad_model(4)  # K = N
    dual = subproblem_closed_form(model, [1, 1, 1, 1], quad_weights)
    assert dual.alpha == 0.0
    assert np.array_equal(dual.beta, np.zeros(4))
    assert np.array_equal(dual.gamma, quad_weights)

    dual = subproblem_closed_form(model, [0, 0, 0, 0], quad_weights)
    assert dual.alpha == 0.0
    assert np.array_equal(dual.beta, quad_weights)
    assert np.array_equal(dual.gamma, np.zeros(4))


def test_subproblem_dual_feasible_randomized():
    rng = np.random.default_rng(71)
    for _ in range(100):
        model, w = random_model(rng)
        v = rng.integers(0, 2, size=model.num_groups)
        dual = subproblem_closed_form(model, v, w)  # asserts feasibility + duality
        assert dual.alpha >= 0


def test_master_single_cut(quad_model, quad_weights):
    model = quad_model(4)
    dual = subproblem_closed_form(model, [0, 0, 0, 0], quad_weights)
    from groupcs.project_benders import _cut_from_dual

    cut = _cut_from_dual(model, dual)
    v, mu = master_solve([cut], model)
    # beta = w: the master picks the G=M groups maximizing coverage mass
    assert mu == cut.value(v, model.sparsity_k)


def test_master_quad_enumeration(quad_model, quad_weights):
    from groupcs.project_benders import _cut_from_dual

    model = quad_model(1)
    cuts = []
    for j in range(4):
        v = np.zeros(4)
        v[j] = 1
        cuts.append(_cut_from_dual(model, subproblem_closed_form(model, v, quad_weights)))
    v, mu = master_solve(cuts, model)
    assert mu == pytest.approx(11.0)
    assert np.array_equal(v, [0, 0, 0, 1])


def test_master_lex_tiebreak():
    model = GroupModel(2, [{0}, {1}], 1)
    # one constant cut: every selection ties, so the all-zero vector wins
    cut = OptimalityCut(0.0, 5.0, np.zeros(2), np.zeros(2))
    v, mu = master_solve([cut], model)
    assert mu == 5.0
    assert np.array_equal(v, [0, 0])


def test_benders_quad_examples(quad_model, quad_weights):
    assert benders_project(quad_model(1), quad_weights).covered_weight == 11.0
    r = benders_project(quad_model(2, 2), quad_weights)
    assert r.covered_weight == 13.0
    assert len(r.support) <= 2
    r = benders_project(quad_model(1), np.zeros(4))
    assert r.covered_weight == 0.0
    assert r.optimal


def test_benders_matches_brute_force_randomized():
    rng = np.random.default_rng(88)
    for _ in range(150):
        model, w = random_model(rng)
        expect = brute_force_projection(model, w).covered_weight
        r = benders_project(model, w)
        assert r.optimal
        assert r.covered_weight == expect


def test_benders_matches_dp_on_narrow_models():
    rng = np.random.default_rng(99)
    checked = 0
    while checked < 40:
        model, w = random_model(rng)
        from groupcs.project_dp import projection_decomposition

        if projection_decomposition(model).width > 14:
            continue
        assert (
            benders_project(model, w).covered_weight
            == dp_project(model, w).covered_weight
        )
        checked += 1


def test_benders_iteration_cap_returns_incumbent(quad_model, quad_weights):
    model = quad_model(2)
    r = benders_project(model, quad_weights, max_iterations=1)
    assert not r.optimal or r.covered_weight == 16.0
    assert r.covered_weight <= 16.0
    # the incumbent is still a feasible projection
    union = set()
    for j in r.selected_groups:
        union |= model.groups[j]
    assert set(r.support) <= union


def test_benders_cut_log(tmp_path, quad_model, quad_weights):
    path = tmp_path / "cuts.csv"
    benders_project(quad_model(1), quad_weights, cut_log=str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == "iteration,mu,violation"
    assert len(lines) >= 2


def test_selection_value_uses_k(quad_model, quad_weights):
    model = quad_model(2, 2)
    assert selection_value(model, quad_weights, [1, 0, 0, 1]) == 13.0
    model = quad_model(2)
    assert selection_value(model, quad_weights, [1, 0, 0, 1]) == 16.0
