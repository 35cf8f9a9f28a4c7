import numpy as np
import pytest

from groupcs import GroupModel


@pytest.fixture
def quad_model():
    """Four groups over four elements: {1,2}, {1,2,3}, {2,4}, {3,4} (1-based)."""
    return lambda g, k=None: GroupModel(
        4, [{0, 1}, {0, 1, 2}, {1, 3}, {2, 3}], g, k
    )


@pytest.fixture
def quad_weights():
    return np.array([4.0, 1.0, 2.0, 9.0])


def random_model(rng, n_max=24, m_max=8, g_max=3, k_mode=None):
    """A random covered group model plus squared-integer weights."""
    import warnings

    n = int(rng.integers(4, n_max + 1))
    m = int(rng.integers(2, m_max + 1))
    groups = []
    for _ in range(m):
        size = int(rng.integers(1, max(2, n // 2) + 1))
        groups.append(set(rng.choice(n, size=size, replace=False).tolist()))
    for i in range(n):
        if not any(i in g for g in groups):
            groups[int(rng.integers(0, m))].add(i)
    g_budget = int(rng.integers(1, min(g_max, m) + 1))
    if k_mode is None:
        k_mode = int(rng.integers(0, 3))
    k = [n, max(1, -(-n // 2)), min(2, n)][k_mode]
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="model contains duplicate groups")
        model = GroupModel(n, groups, g_budget, k)
    weights = rng.integers(0, 11, size=n).astype(float) ** 2
    return model, weights


@pytest.fixture(autouse=True)
def _silence_duplicate_group_warning():
    import warnings

    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="model contains duplicate groups")
        yield
