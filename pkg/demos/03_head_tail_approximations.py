"""Head and tail approximations versus the exact optimum.

The greedy head may use extra groups to capture almost all of the best
coverable weight; the LP-rounding tail may use extra groups to leave
almost as little weight uncovered as the best exact selection.  Both
trade accuracy for group budget through their epsilon.
"""

import math

import numpy as np

from groupcs import GroupModel, brute_force_projection, frequency
from groupcs.approx import head_greedy, lp_solve, tail_lp_round

rng = np.random.default_rng(1)
n, m_groups = 40, 12
groups = [set(rng.choice(n, size=6, replace=False).tolist()) for _ in range(m_groups)]
for i in range(n):
    if not any(i in g for g in groups):
        groups[rng.integers(0, m_groups)].add(i)
model = GroupModel(n, groups, 3)
w = rng.random(n)

opt = brute_force_projection(model, w).covered_weight
total = w.sum()
print(f"exact optimum with G=3 groups: {opt:.4f} of {total:.4f} total")

print("\ngreedy head:")
for eps in (0.5, 0.25, 0.05):
    h = head_greedy(model, w, 3, eps)
    budget = math.ceil(3 * math.log2(1 / eps))
    print(f"  eps={eps:<5} covered {h.covered_weight:.4f} "
          f">= {(1 - eps) * opt:.4f} using {len(h.selected_groups)}/{budget} groups")

print("\nLP relaxation:")
sol = lp_solve(model, w, 3)
print(f"  objective {sol.objective:.4f} (>= exact optimum), "
      f"fractional groups: {np.count_nonzero((sol.v > 1e-9) & (sol.v < 1 - 1e-9))}")

print("\nLP-rounding tail:")
f = frequency(model)
for eps in (1.0, 0.5, 1 / 19):
    t = tail_lp_round(model, w, 3, eps)
    cap = math.ceil((1 + 1 / eps) * f * 3)
    print(f"  eps={eps:<6.3f} residual {t.residual_weight:.4f} "
          f"<= {(1 + eps) * (total - opt):.4f} using {len(t.selected_groups)}/{cap} groups")
