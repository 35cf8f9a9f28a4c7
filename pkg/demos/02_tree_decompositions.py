"""Graphs of a group model and the decompositions behind the DP projector.

Builds the incidence and intersection graphs of two models, computes
tree decompositions, converts to the nice form, and demonstrates the
lifting of an intersection-graph decomposition to the incidence graph
(width grows by at most one, even when the intersection graph is much
wider, as in the star family below).
"""

from groupcs import (
    GroupModel,
    build_graphs,
    compute_decomposition,
    lift_intersection_to_incidence,
    to_nice,
    validate_decomposition,
)

model = GroupModel(4, [{0, 1}, {0, 1, 2}, {1, 3}, {2, 3}], 1)
incidence, intersection = build_graphs(model)
print("incidence graph:", incidence.num_vertices, "vertices,",
      len(incidence.edges), "edges")
print("intersection edges:",
      [("ABCD"[a], "ABCD"[b]) for a, b in intersection.edges])

td = compute_decomposition(intersection.adjacency())
print("\nintersection decomposition width:", td.width)
for i, bag in enumerate(td.bags):
    print(f"  bag {i}: {{{','.join('ABCD'[v] for v in sorted(bag))}}} "
          f"parent={td.parent[i]}")

lifted = lift_intersection_to_incidence(td, model)
print("lifted to incidence graph: width", lifted.width,
      "valid:", bool(validate_decomposition(lifted, incidence.adjacency())))

ntd = to_nice(compute_decomposition(incidence.adjacency()))
kinds = [ntd.kinds[x] for x in ntd.postorder()]
print("\nnice decomposition of the incidence graph:",
      ntd.num_nodes, "nodes, width", ntd.width)
print("node kinds bottom-up:", " ".join(k[0].upper() for k in kinds))

# star family: t+2 groups through one hub element; the intersection graph
# is a clique (width t+1) while the incidence graph stays a tree (width 1)
for t in (1, 2, 3, 4):
    star = GroupModel(t + 3, [{i, t + 2} for i in range(t + 2)], 1)
    inc, inter = build_graphs(star)
    wi = compute_decomposition(inter.adjacency()).width
    wb = compute_decomposition(inc.adjacency()).width
    print(f"star t={t}: intersection width {wi}, incidence width {wb}")
