import numpy as np
import pytest
from hypothesis import given, strategies as st

from groupcs import (
    GroupModel,
    InstanceFormatError,
    InstanceTooLargeError,
    apply_support,
    brute_force_projection,
    frequency,
    parse_instance,
    save_instance,
    load_instance,
    weights_from_signal,
)


def test_weights_from_signal():
    assert np.array_equal(weights_from_signal([0.0, 0.0, 0.0], 2).values, [0, 0, 0])
    assert np.array_equal(weights_from_signal([-2.0, 3.0], 2).values, [4, 9])
    assert np.array_equal(weights_from_signal([-2.0, 3.0], 1).values, [2, 3])
    with pytest.raises(ValueError):
        weights_from_signal([1.0], 3)


def test_frequency(quad_model):
    assert frequency(quad_model(1)) == 3  # element 2 lies in three groups
    assert frequency(GroupModel(4, [{0, 1}, {2, 3}], 1)) == 1
    assert frequency(GroupModel(5, [set(range(5))], 1)) == 1


def test_apply_support():
    x = np.array([1.0, 2.0, 3.0])
    assert np.array_equal(apply_support(x, {1}), [0, 2, 0])
    assert np.array_equal(apply_support(x, {0, 1, 2}), x)
    assert np.array_equal(apply_support(x, set()), [0, 0, 0])
    with pytest.raises(IndexError):
        apply_support(x, {5})


@given(st.lists(st.floats(-10, 10), min_size=1, max_size=30), st.data())
def test_apply_support_idempotent_and_norm(xs, data):
    x = np.array(xs)
    support = data.draw(st.sets(st.integers(0, len(x) - 1)))
    once = apply_support(x, support)
    assert np.array_equal(apply_support(once, support), once)
    for p in (1, 2):
        assert np.isclose(
            np.linalg.norm(once, p) ** p,
            sum(abs(x[i]) ** p for i in support),
        )


def test_model_validation():
    with pytest.raises(ValueError, match="cover"):
        GroupModel(4, [{0, 1}], 1)
    with pytest.raises(ValueError, match="empty"):
        GroupModel(2, [{0, 1}, set()], 1)
    with pytest.raises(ValueError, match="outside"):
        GroupModel(2, [{0, 5}], 1)
    with pytest.raises(ValueError, match="budget_g"):
        GroupModel(2, [{0, 1}], 2)
    with pytest.warns(UserWarning, match="duplicate"):
        GroupModel(2, [{0, 1}, {0, 1}], 1)


def test_brute_force_quad_examples(quad_model, quad_weights):
    r = brute_force_projection(quad_model(1), quad_weights)
    assert r.covered_weight == 11.0
    assert r.selected_groups == (3,)
    assert r.support == (2, 3)

    assert brute_force_projection(quad_model(2), quad_weights).covered_weight == 16.0

    r = brute_force_projection(quad_model(2, 2), quad_weights)
    assert r.covered_weight == 13.0
    assert r.support == (0, 3)


def test_brute_force_lex_tiebreak():
    model = GroupModel(2, [{0}, {1}, {0, 1}], 1)
    w = np.array([1.0, 1.0])
    # group 2 covers weight 2; unique optimum
    assert brute_force_projection(model, w).selected_groups == (2,)
    # all equal weights zero: empty selection wins the tie
    assert brute_force_projection(model, np.zeros(2)).selected_groups == ()


def test_brute_force_guard():
    n = 40
    model = GroupModel(n, [{i} for i in range(n)], 20)
    with pytest.raises(InstanceTooLargeError):
        brute_force_projection(model, np.ones(n))


def test_brute_force_k_constraint(quad_model, quad_weights):
    r = brute_force_projection(quad_model(2, 1), quad_weights)
    assert r.covered_weight == 9.0
    assert len(r.support) == 1


def test_instance_roundtrip(tmp_path, quad_model, quad_weights):
    path = tmp_path / "fig.inst"
    save_instance(path, quad_model(1), quad_weights)
    model, w = load_instance(path)
    assert model.ground_size == 4
    assert model.groups == quad_model(1).groups
    assert np.array_equal(w, quad_weights)


@pytest.mark.parametrize(
    "text,lineno",
    [
        ("", 1),
        ("4 4 1\n", 1),
        ("2 1 1 2\n1 3\n", 2),
        ("2 2 1 2\n1\n2\n1 2 3\n", 4),
        ("2 1 1 2\n1 x\n", 2),
        ("2 1 1 2\n\n", 2),
    ],
)
def test_instance_errors_carry_line_numbers(text, lineno):
    with pytest.raises(InstanceFormatError, match=f"line {lineno}"):
        parse_instance(text)


def test_instance_is_one_based():
    model, w = parse_instance("3 2 1 3\n1 2\n3\n0.5 0 2\n")
    assert model.groups == (frozenset({0, 1}), frozenset({2}))
    assert w[2] == 2.0


def test_frequency_one_iff_disjoint():
    rng = np.random.default_rng(17)
    for _ in range(40):
        n = int(rng.integers(4, 16))
        cuts = sorted(rng.choice(np.arange(1, n), size=int(rng.integers(1, 4)), replace=False).tolist())
        parts = [set(range(a, b)) for a, b in zip([0] + cuts, cuts + [n])]
        model = GroupModel(n, parts, 1)
        assert frequency(model) == 1
        # overlap two parts: frequency must exceed 1
        if len(parts) >= 2:
            parts2 = [set(p) for p in parts]
            parts2[0].add(next(iter(parts2[1])))
            assert frequency(GroupModel(n, parts2, 1)) > 1
