"""Exact group-model projection, three ways.

A small model over four elements shows the three exact projectors
(exhaustive search, treewidth dynamic programming, cutting planes)
agreeing on the optimal group selection, with and without an element
budget.
"""

import numpy as np

from groupcs import GroupModel, brute_force_projection, dp_project
from groupcs.project_benders import benders_project

# groups over {1,2,3,4} (shown 1-based): A={1,2} B={1,2,3} C={2,4} D={3,4}
groups = [{0, 1}, {0, 1, 2}, {1, 3}, {2, 3}]
weights = np.array([4.0, 1.0, 2.0, 9.0])

print("weights:", weights)
for g_budget in (1, 2):
    model = GroupModel(4, groups, g_budget)
    print(f"\n-- budget of {g_budget} group(s) --")
    for name, solver in [
        ("brute force", brute_force_projection),
        ("treewidth DP", dp_project),
        ("cutting planes", benders_project),
    ]:
        r = solver(model, weights)
        picks = ",".join("ABCD"[j] for j in r.selected_groups)
        print(f"{name:15} value={r.covered_weight:5.1f} groups={picks or '-'} "
              f"support={[i + 1 for i in r.support]}")

print("\n-- two groups but at most two nonzeros --")
model = GroupModel(4, groups, 2, 2)
for name, solver in [
    ("brute force", brute_force_projection),
    ("treewidth DP", dp_project),
    ("cutting planes", benders_project),
]:
    r = solver(model, weights)
    print(f"{name:15} value={r.covered_weight:5.1f} "
          f"support={[i + 1 for i in r.support]}")

# the projected vector is the signal restricted to the chosen support
signal = np.array([-2.0, 1.0, np.sqrt(2.0), 3.0])
r = dp_project(GroupModel(4, groups, 1), np.square(signal), signal=signal)
print("\nprojection of", signal, "->", r.projected_vector)
