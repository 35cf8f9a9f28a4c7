"""Graphs of a group model and (nice) tree decompositions.

The incidence graph is bipartite: element vertices 0..N-1 and group
vertices N..N+M-1, with an edge whenever the element belongs to the
group.  The intersection graph has one vertex per group and an edge
between overlapping groups.

Decompositions come from a min-fill elimination heuristic, optionally
sharpened by a budgeted exact branch-and-bound search over elimination
orders when the graph is small enough for that to finish.
"""

import logging
import sys
from dataclasses import dataclass

__all__ = [
    "IncidenceGraph",
    "IntersectionGraph",
    "TreeDecomposition",
    "NiceTreeDecomposition",
    "ValidationReport",
    "build_graphs",
    "build_incidence_graph",
    "build_intersection_graph",
    "compute_decomposition",
    "validate_decomposition",
    "to_nice",
    "lift_intersection_to_incidence",
    "save_decomposition",
    "load_decomposition",
]

log = logging.getLogger(__name__)

LEAF, INTRODUCE, FORGET, JOIN = "leaf", "introduce", "forget", "join"


@dataclass(frozen=True)
class IncidenceGraph:
    """Bipartite element/group graph of a model."""

    num_elements: int
    num_groups: int
    edges: tuple[tuple[int, int], ...]  # (element, group-vertex) pairs

    @property
    def num_vertices(self) -> int:
        return self.num_elements + self.num_groups

    def adjacency(self) -> dict[int, set[int]]:
        adj = {v: set() for v in range(self.num_vertices)}
        for e, g in self.edges:
            adj[e].add(g)
            adj[g].add(e)
        return adj


@dataclass(frozen=True)
class IntersectionGraph:
    """One vertex per group; edges join overlapping groups."""

    num_groups: int
    edges: tuple[tuple[int, int], ...]

    @property
    def num_vertices(self) -> int:
        return self.num_groups

    def adjacency(self) -> dict[int, set[int]]:
        adj = {v: set() for v in range(self.num_groups)}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj


def build_incidence_graph(model) -> IncidenceGraph:
    n = model.ground_size
    edges = []
    for j, grp in enumerate(model.groups):
        for i in sorted(grp):
            edges.append((i, n + j))
    return IncidenceGraph(n, model.num_groups, tuple(edges))


def build_intersection_graph(model) -> IntersectionGraph:
    m = model.num_groups
    edges = []
    for a in range(m):
        for b in range(a + 1, m):
            if model.groups[a] & model.groups[b]:
                edges.append((a, b))
    return IntersectionGraph(m, tuple(edges))


def build_graphs(model):
    """Both graphs, with deterministic vertex order (elements then groups)."""
    return build_incidence_graph(model), build_intersection_graph(model)


def _as_adjacency(g) -> dict[int, set[int]]:
    if hasattr(g, "adjacency"):
        return g.adjacency()
    return {v: set(nb) for v, nb in g.items()}


# ---------------------------------------------------------------------------
# Tree decompositions


@dataclass(frozen=True)
class TreeDecomposition:
    """Rooted decomposition: ``parent[i] == -1`` exactly at the root."""

    bags: tuple[frozenset[int], ...]
    parent: tuple[int, ...]

    def __post_init__(self):
        if len(self.bags) != len(self.parent):
            raise ValueError("bags and parent arrays differ in length")
        roots = [i for i, p in enumerate(self.parent) if p == -1]
        if len(roots) != 1:
            raise ValueError("decomposition must have exactly one root")
        for i, p in enumerate(self.parent):
            if p != -1 and not 0 <= p < len(self.bags):
                raise ValueError(f"node {i} has invalid parent {p}")
        # walking to the root must terminate: parents form a forest
        for i in range(len(self.parent)):
            seen, v = set(), i
            while v != -1:
                if v in seen:
                    raise ValueError("parent pointers contain a cycle")
                seen.add(v)
                v = self.parent[v]

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=0) - 1

    def children(self) -> list[list[int]]:
        ch: list[list[int]] = [[] for _ in self.bags]
        for i, p in enumerate(self.parent):
            if p != -1:
                ch[p].append(i)
        return ch

    @property
    def root(self) -> int:
        return self.parent.index(-1)


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violated_property: int | None = None  # 1 cover, 2 connectivity, 3 edges
    witness: object = None
    message: str = ""

    def __bool__(self):
        return self.ok


def validate_decomposition(td: TreeDecomposition, g) -> ValidationReport:
    """Check the three decomposition properties against a graph.

    Reports the first violated property together with a witness vertex
    or edge; tree shape itself is enforced by the TreeDecomposition type.
    """
    adj = _as_adjacency(g)
    vertices = set(adj)
    in_bags = set().union(*td.bags) if td.bags else set()
    missing = vertices - in_bags
    if missing:
        v = min(missing)
        return ValidationReport(False, 1, v, f"vertex {v} appears in no bag")
    children = td.children()
    for v in sorted(vertices):
        nodes = {i for i, b in enumerate(td.bags) if v in b}
        # count connected components of `nodes` in the tree
        seen: set[int] = set()
        comps = 0
        for start in nodes:
            if start in seen:
                continue
            comps += 1
            stack = [start]
            seen.add(start)
            while stack:
                x = stack.pop()
                for y in children[x] + ([td.parent[x]] if td.parent[x] != -1 else []):
                    if y in nodes and y not in seen:
                        seen.add(y)
                        stack.append(y)
        if comps > 1:
            return ValidationReport(
                False, 2, v, f"bags containing vertex {v} form {comps} subtrees"
            )
    for u in sorted(vertices):
        for v in sorted(adj[u]):
            if u < v and not any(u in b and v in b for b in td.bags):
                return ValidationReport(
                    False, 3, (u, v), f"edge ({u},{v}) is in no bag"
                )
    return ValidationReport(True, message="ok")


# -- min-fill heuristic and exact elimination search ------------------------


def _fill_in(adj, v) -> int:
    nb = list(adj[v])
    cnt = 0
    for a in range(len(nb)):
        for b in range(a + 1, len(nb)):
            if nb[b] not in adj[nb[a]]:
                cnt += 1
    return cnt


def _eliminate(adj, v) -> None:
    nb = list(adj[v])
    for a in range(len(nb)):
        for b in range(a + 1, len(nb)):
            adj[nb[a]].add(nb[b])
            adj[nb[b]].add(nb[a])
    for u in nb:
        adj[u].discard(v)
    del adj[v]


def _min_fill_order(adj) -> list[int]:
    adj = {v: set(nb) for v, nb in adj.items()}
    order = []
    while adj:
        v = min(adj, key=lambda u: (_fill_in(adj, u), u))
        order.append(v)
        _eliminate(adj, v)
    return order


def _mmd_lower_bound(adj) -> int:
    # minor-min-width: repeatedly contract a min-degree vertex into its
    # least-connected neighbour; the max of the min degrees bounds treewidth
    adj = {v: set(nb) for v, nb in adj.items()}
    best = 0
    while len(adj) > 1:
        d, v = min((len(nb), u) for u, nb in adj.items())
        best = max(best, d)
        if not adj[v]:
            del adj[v]
            continue
        _, u = min((len(adj[w] & adj[v]), w) for w in sorted(adj[v]))
        for w in adj[v]:
            if w != u:
                adj[u].add(w)
                adj[w].add(u)
        for w in list(adj[v]):
            adj[w].discard(v)
        del adj[v]
    return best


def _order_width(adj, order) -> int:
    adj = {v: set(nb) for v, nb in adj.items()}
    width = 0
    for v in order:
        width = max(width, len(adj[v]))
        _eliminate(adj, v)
    return width


class _Budget:
    def __init__(self, limit):
        self.left = limit

    def spend(self) -> bool:
        self.left -= 1
        return self.left >= 0


def _exists_order(adj, target: int, budget: _Budget, memo, prefix) -> bool:
    """Is there an elimination order of the remaining graph with width <= target?"""
    if len(adj) <= target + 1:
        prefix.extend(sorted(adj))
        return True
    key = frozenset(adj)
    hit = memo.get(key)
    if hit is not None and hit >= target:
        return False  # known infeasible at this or a looser target
    if not budget.spend():
        raise TimeoutError
    # a simplicial vertex of small degree can always be eliminated first
    for v in sorted(adj):
        if len(adj[v]) <= target:
            nb = list(adj[v])
            if all(nb[b] in adj[nb[a]] for a in range(len(nb)) for b in range(a + 1, len(nb))):
                nxt = {u: set(x) for u, x in adj.items()}
                _eliminate(nxt, v)
                prefix.append(v)
                if _exists_order(nxt, target, budget, memo, prefix):
                    return True
                prefix.pop()
                memo[key] = target
                return False
    for v in sorted(adj, key=lambda u: (len(adj[u]), u)):
        if len(adj[v]) > target:
            continue
        nxt = {u: set(x) for u, x in adj.items()}
        _eliminate(nxt, v)
        prefix.append(v)
        if _exists_order(nxt, target, budget, memo, prefix):
            return True
        prefix.pop()
    memo[key] = target
    return False


def _decomposition_from_order(adj, order) -> tuple[list[frozenset[int]], list[int]]:
    """Standard bag construction from an elimination order (rooted at the last)."""
    filled = {v: set(nb) for v, nb in adj.items()}
    pos = {v: i for i, v in enumerate(order)}
    bags: list[frozenset[int]] = []
    later_nb: list[list[int]] = []
    for v in order:
        nb = sorted(filled[v], key=lambda u: pos[u])
        bags.append(frozenset([v] + nb))
        later_nb.append(nb)
        _eliminate(filled, v)
    parent = [-1] * len(order)
    for i, nb in enumerate(later_nb):
        if nb:
            parent[i] = pos[nb[0]]
    # orphaned early nodes (disconnected graphs) hang off the last node
    for i in range(len(order) - 1):
        if parent[i] == -1:
            parent[i] = len(order) - 1
    return bags, parent


def compute_decomposition(
    g, exact_width_limit: int = 8, search_budget: int = 200_000
) -> TreeDecomposition:
    """Tree decomposition by min-fill, refined by exact search when cheap.

    When the heuristic width is at most ``exact_width_limit``, a
    branch-and-bound over elimination orders (bounded by ``search_budget``
    expansions) tries to certify or beat it; if the search completes, the
    returned width is the exact treewidth.  Disconnected graphs are handled
    per component by the same elimination machinery.
    """
    adj = _as_adjacency(g)
    if not adj:
        return TreeDecomposition((frozenset(),), (-1,))
    order = _min_fill_order(adj)
    width = _order_width(adj, order)
    if 0 < width <= exact_width_limit:
        lower = _mmd_lower_bound(adj)
        budget = _Budget(search_budget)
        memo: dict[frozenset, int] = {}
        try:
            for target in range(lower, width):
                prefix: list[int] = []
                if _exists_order(adj, target, budget, memo, prefix):
                    order, width = prefix, target
                    break
        except TimeoutError:
            log.debug("exact treewidth search hit its budget; keeping min-fill order")
    bags, parent = _decomposition_from_order(adj, order)
    td = TreeDecomposition(tuple(bags), tuple(parent))
    report = validate_decomposition(td, adj)
    if not report:
        raise AssertionError(f"internal decomposition invalid: {report.message}")
    return td


# ---------------------------------------------------------------------------
# Nice decompositions


@dataclass(frozen=True)
class NiceTreeDecomposition:
    """Rooted decomposition with leaf/introduce/forget/join node types.

    Leaves and the root carry empty bags; introduce/forget nodes differ
    from their child by the single vertex stored in ``vertex``.
    """

    kinds: tuple[str, ...]
    bags: tuple[frozenset[int], ...]
    vertex: tuple[int, ...]  # -1 for leaf/join nodes
    children: tuple[tuple[int, ...], ...]
    root: int

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=0) - 1

    @property
    def num_nodes(self) -> int:
        return len(self.bags)

    def postorder(self) -> list[int]:
        out, stack = [], [(self.root, False)]
        while stack:
            node, done = stack.pop()
            if done:
                out.append(node)
            else:
                stack.append((node, True))
                for c in self.children[node]:
                    stack.append((c, False))
        return out

    def as_tree_decomposition(self) -> TreeDecomposition:
        parent = [-1] * self.num_nodes
        for i, ch in enumerate(self.children):
            for c in ch:
                parent[c] = i
        return TreeDecomposition(self.bags, tuple(parent))

    def check(self) -> None:
        """Raise if the node typing rules are violated anywhere."""
        for i, kind in enumerate(self.kinds):
            bag, ch = self.bags[i], self.children[i]
            if kind == LEAF:
                if bag or len(ch) > 1:
                    raise ValueError(f"leaf node {i} must have an empty bag")
                if ch and self.bags[ch[0]]:  # empty-bag pass-through root
                    raise ValueError(f"leaf-root {i} must sit on an empty bag")
            elif kind == INTRODUCE:
                (c,) = ch
                if bag != self.bags[c] | {self.vertex[i]} or self.vertex[i] in self.bags[c]:
                    raise ValueError(f"introduce node {i} malformed")
            elif kind == FORGET:
                (c,) = ch
                if self.bags[c] != bag | {self.vertex[i]} or self.vertex[i] in bag:
                    raise ValueError(f"forget node {i} malformed")
            elif kind == JOIN:
                a, b = ch
                if self.bags[a] != bag or self.bags[b] != bag:
                    raise ValueError(f"join node {i} children bags differ")
            else:
                raise ValueError(f"unknown node kind {kind!r}")
        if self.bags[self.root]:
            raise ValueError("root bag must be empty")


class _NiceBuilder:
    def __init__(self):
        self.kinds: list[str] = []
        self.bags: list[frozenset[int]] = []
        self.vertex: list[int] = []
        self.children: list[tuple[int, ...]] = []

    def add(self, kind, bag, vertex=-1, children=()) -> int:
        self.kinds.append(kind)
        self.bags.append(frozenset(bag))
        self.vertex.append(vertex)
        self.children.append(tuple(children))
        return len(self.bags) - 1

    def chain_to(self, node: int, src: frozenset, dst: frozenset) -> int:
        """Forget src-only vertices (descending), introduce dst-only (ascending)."""
        cur = set(src)
        for v in sorted(src - dst, reverse=True):
            cur.discard(v)
            node = self.add(FORGET, cur, v, (node,))
        for v in sorted(dst - src):
            cur.add(v)
            node = self.add(INTRODUCE, cur, v, (node,))
        return node


def to_nice(td: TreeDecomposition) -> NiceTreeDecomposition:
    """Convert to a nice decomposition of the same width.

    Introduce order is ascending vertex id, forget order descending; a
    node with more than two children is binarized with joins.  The root
    is an empty-bag leaf-type node stacked on the final forget chain.
    """
    b = _NiceBuilder()
    children = td.children()

    def build(x: int) -> int:
        bag = td.bags[x]
        subs = [build(c) for c in children[x]]
        if not subs:
            leaf = b.add(LEAF, frozenset())
            return b.chain_to(leaf, frozenset(), bag)
        tops = [b.chain_to(s, td.bags[c], bag) for s, c in zip(subs, children[x])]
        node = tops[0]
        for other in tops[1:]:
            node = b.add(JOIN, bag, -1, (node, other))
        return node

    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 4 * len(td.bags) + 100))
    try:
        top = build(td.root)
    finally:
        sys.setrecursionlimit(old)
    top = b.chain_to(top, td.bags[td.root], frozenset())
    if b.kinds[top] != LEAF:
        top = b.add(LEAF, frozenset(), -1, (top,))
    ntd = NiceTreeDecomposition(
        tuple(b.kinds), tuple(b.bags), tuple(b.vertex), tuple(b.children), top
    )
    ntd.check()
    return ntd


def lift_intersection_to_incidence(td: TreeDecomposition, model) -> TreeDecomposition:
    """Lift a decomposition of the intersection graph to the incidence graph.

    Group vertex j becomes N+j; for each element a new leaf bag holds the
    element together with all groups containing it, attached to a node
    whose bag already contains those groups (one exists because the
    containing groups form a clique and subtrees of a tree have the Helly
    property).  Width grows by at most one.
    """
    inter = build_intersection_graph(model)
    report = validate_decomposition(td, inter)
    if not report:
        raise ValueError(f"input decomposition invalid: {report.message}")
    n = model.ground_size
    bags = [frozenset(n + j for j in bag) for bag in td.bags]
    parent = list(td.parent)
    for i in range(n):
        owners = set(model.groups_containing(i))
        host = next(
            (x for x, bag in enumerate(td.bags) if owners <= bag), None
        )
        if host is None:
            raise ValueError(f"no bag contains all groups of element {i}")
        bags.append(frozenset({n + j for j in owners} | {i}))
        parent.append(host)
    return TreeDecomposition(tuple(bags), tuple(parent))


# ---------------------------------------------------------------------------
# Text export/import: one line per node "node_id parent_id v1 v2 ..."


def save_decomposition(path, td: TreeDecomposition) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for i, bag in enumerate(td.bags):
            members = " ".join(str(v) for v in sorted(bag))
            fh.write(f"{i} {td.parent[i]}{' ' if members else ''}{members}\n")


def load_decomposition(path, g=None) -> TreeDecomposition:
    """Read a decomposition; validated against ``g`` when a graph is given."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for ln, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            toks = line.split()
            if len(toks) < 2:
                raise ValueError(f"line {ln}: expected 'node parent [members...]'")
            try:
                rows.append((int(toks[0]), int(toks[1]), frozenset(map(int, toks[2:]))))
            except ValueError:
                raise ValueError(f"line {ln}: non-integer field") from None
    rows.sort()
    ids = [r[0] for r in rows]
    if ids != list(range(len(rows))):
        raise ValueError("node ids must be 0..t-1")
    td = TreeDecomposition(
        tuple(r[2] for r in rows), tuple(r[1] for r in rows)
    )
    if g is not None:
        report = validate_decomposition(td, g)
        if not report:
            raise ValueError(f"decomposition invalid for graph: {report.message}")
    return td
