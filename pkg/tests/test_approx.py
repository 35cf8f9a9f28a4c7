import math

import numpy as np
import pytest

from groupcs import GroupModel, brute_force_projection, frequency
from groupcs.approx import head_greedy, lp_solve, tail_lp_round
from groupcs.model import InstanceTooLargeError
from conftest import random_model

HEAD_EPS = (0.5, 0.25, 0.05)
TAIL_EPS = (1.0, 0.5, 1.0 / 19.0)


def test_head_quad_example(quad_model, quad_weights):
    h = head_greedy(quad_model(1), quad_weights, 1, 0.5)
    assert h.covered_weight == 11.0
    assert h.selected_groups == (3,)


def test_head_exhaustive_budget():
    model = GroupModel(4, [{0, 1}, {2, 3}], 2)
    w = np.array([1.0, 2.0, 3.0, 4.0])
    h = head_greedy(model, w, 2, 0.25)
    assert h.covered_weight == 10.0


def test_head_zero_weights(quad_model):
    h = head_greedy(quad_model(1), np.zeros(4), 1, 0.5)
    assert h.covered_weight == 0.0


def test_head_rejects_bad_eps(quad_model, quad_weights):
    with pytest.raises(ValueError):
        head_greedy(quad_model(1), quad_weights, 1, 0.0)
    with pytest.raises(ValueError):
        head_greedy(quad_model(1), quad_weights, 1, 1.0)


def test_head_vector_restriction(quad_model, quad_weights):
    signal = np.array([2.0, -1.0, 0.5, -3.0])
    h = head_greedy(quad_model(1), quad_weights, 1, 0.5, signal=signal)
    assert np.array_equal(h.head_vector, [0, 0, 0.5, -3.0])


def test_head_guarantee_randomized():
    rng = np.random.default_rng(123)
    for _ in range(60):
        model, _ = random_model(rng, k_mode=0)
        w = rng.random(model.ground_size)
        opt = brute_force_projection(model, w).covered_weight
        for eps in HEAD_EPS:
            h = head_greedy(model, w, model.budget_g, eps)
            assert h.covered_weight >= (1 - eps) * opt - 1e-9
            assert len(h.selected_groups) <= math.ceil(
                model.budget_g * math.log2(1 / eps)
            )


def test_lp_disjoint_blocks_integral():
    model = GroupModel(4, [{0, 1}, {2, 3}], 1)
    sol = lp_solve(model, np.array([1.0, 2.0, 3.0, 4.0]), 1)
    assert sol.objective == pytest.approx(7.0)
    assert np.allclose(sol.v, [0, 1])


def test_lp_full_budget(quad_model, quad_weights):
    sol = lp_solve(quad_model(1), quad_weights, 4)
    assert sol.objective == pytest.approx(16.0)
    assert np.allclose(sol.u, 1.0)


def test_lp_zero_weights(quad_model):
    sol = lp_solve(quad_model(1), np.zeros(4), 1)
    assert sol.objective == pytest.approx(0.0)


def test_lp_guard():
    class Fake:
        ground_size = 30000
        num_groups = 10
    with pytest.raises(InstanceTooLargeError):
        lp_solve(Fake(), np.ones(30000), 1)


def test_lp_feasibility_and_dominance_randomized():
    rng = np.random.default_rng(321)
    for _ in range(60):
        model, _ = random_model(rng, k_mode=0)
        w = rng.random(model.ground_size) * 5
        sol = lp_solve(model, w, model.budget_g)
        assert abs(sol.v.sum() - model.budget_g) <= 1e-7
        cover = model.membership_matrix().T @ sol.v
        assert np.all(sol.u <= cover + 1e-7)
        assert np.all(sol.u >= -1e-9) and np.all(sol.u <= 1 + 1e-9)
        opt = brute_force_projection(model, w).covered_weight
        assert sol.objective >= opt - 1e-7


def test_lp_matches_scipy_reference():
    linprog = pytest.importorskip("scipy.optimize").linprog
    from groupcs.approx import _build_relaxation

    rng = np.random.default_rng(7)
    for _ in range(25):
        model, _ = random_model(rng, k_mode=0)
        w = rng.random(model.ground_size) * 3
        budget = model.budget_g
        sol = lp_solve(model, w, budget)
        n = model.ground_size
        c, a, sense, b, ub = _build_relaxation(model, w, budget)
        ref = linprog(
            -c,
            A_ub=a[:n],
            b_ub=b[:n],
            A_eq=a[n:],
            b_eq=b[n:],
            bounds=[(0, 1)] * len(c),
            method="highs",
        )
        assert ref.status == 0
        assert sol.objective == pytest.approx(-ref.fun, abs=1e-7)


def test_tail_zero_residual_when_one_group_fits():
    model = GroupModel(4, [{0, 1}, {2, 3}], 1)
    w = np.array([0.0, 0.0, 1.0, 2.0])  # supported inside one group
    t = tail_lp_round(model, w, 1, 0.5)
    assert t.residual_weight == pytest.approx(0.0)


def test_tail_disjoint_example():
    model = GroupModel(4, [{0, 1}, {2, 3}], 1)
    t = tail_lp_round(model, np.array([1.0, 2.0, 3.0, 4.0]), 1, 1.0)
    assert t.selected_groups == (1,)
    assert t.residual_weight == pytest.approx(3.0)


def test_tail_quad_bounds(quad_model, quad_weights):
    model = quad_model(1)
    t = tail_lp_round(model, quad_weights, 1, 1.0)
    assert len(t.selected_groups) <= 6  # (1 + 1) * f=3 * G=1
    assert t.residual_weight <= 2 * (16.0 - 11.0) + 1e-9


def test_tail_guarantee_randomized():
    rng = np.random.default_rng(456)
    for _ in range(60):
        model, _ = random_model(rng, k_mode=0)
        w = rng.random(model.ground_size)
        opt = brute_force_projection(model, w).covered_weight
        best_residual = float(w.sum()) - opt
        f = frequency(model)
        for eps in TAIL_EPS:
            t = tail_lp_round(model, w, model.budget_g, eps)
            assert t.residual_weight <= (1 + eps) * best_residual + 1e-9
            assert len(t.selected_groups) <= math.ceil(
                (1 + 1 / eps) * f * model.budget_g
            )


def test_l2_guarantees_via_squared_weights():
    # squared weights give sqrt-accuracy guarantees in the l2 norm
    rng = np.random.default_rng(654)
    for _ in range(25):
        model, _ = random_model(rng, k_mode=0)
        x = rng.standard_normal(model.ground_size)
        w = x * x
        opt = brute_force_projection(model, w).covered_weight
        eps = 0.0975  # 1 - 0.95**2
        h = head_greedy(model, w, model.budget_g, eps)
        lhs = np.linalg.norm(x[list(h.support)]) if h.support else 0.0
        assert lhs >= math.sqrt(1 - eps) * math.sqrt(opt) - 1e-9
        eps_t = 1.05**2 - 1
        t = tail_lp_round(model, w, model.budget_g, eps_t)
        tail_norm = math.sqrt(max(t.residual_weight, 0.0))
        best = math.sqrt(max(float(w.sum()) - opt, 0.0))
        assert tail_norm <= math.sqrt(1 + eps_t) * best + 1e-9


def test_lp_warm_start_reuses_basis(quad_model, quad_weights):
    model = quad_model(1)
    sol = lp_solve(model, quad_weights, 2)
    before = sol.state.pivots
    sol2 = lp_solve(model, quad_weights * 1.01, 2, warm_state=sol.state)
    assert sol2.objective == pytest.approx(16.0 * 1.01)
    assert sol2.state.pivots - before <= 3
