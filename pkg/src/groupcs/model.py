"""Group models, weight vectors, and the exhaustive projection oracle.

A group model is a list of index sets ("groups") over the ground set
``{0, ..., N-1}`` together with a group budget G and an optional element
budget K.  Projecting a signal onto the model means picking at most G
groups and keeping the K heaviest covered entries; everything else in
this package is built around that operation.

Indices are 0-based internally.  The text instance format is 1-based.
"""

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GroupModel",
    "WeightVector",
    "ProjectionResult",
    "InstanceTooLargeError",
    "InstanceFormatError",
    "weights_from_signal",
    "frequency",
    "apply_support",
    "brute_force_projection",
    "k_heaviest",
    "make_projection_result",
    "load_instance",
    "parse_instance",
    "save_instance",
]


class InstanceTooLargeError(ValueError):
    """An instance exceeds a solver's enumeration or memory guard."""


class InstanceFormatError(ValueError):
    """A model instance file is malformed; message carries the line number."""


@dataclass(frozen=True)
class GroupModel:
    """A collection of index groups with a group budget and element budget.

    Attributes:
        ground_size: size N of the ground set.
        groups: M non-empty index sets over range(N); order is identity.
        budget_g: maximum number of groups a support may use (1..M).
        sparsity_k: maximum support size (1..N); N means unconstrained.
    """

    ground_size: int
    groups: tuple[frozenset[int], ...]
    budget_g: int
    sparsity_k: int = field(default=-1)

    def __init__(self, ground_size, groups, budget_g, sparsity_k=None):
        groups = tuple(frozenset(g) for g in groups)
        if sparsity_k is None:
            sparsity_k = ground_size
        object.__setattr__(self, "ground_size", int(ground_size))
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "budget_g", int(budget_g))
        object.__setattr__(self, "sparsity_k", int(sparsity_k))
        self._validate()

    def _validate(self):
        n, m = self.ground_size, len(self.groups)
        if n < 1:
            raise ValueError("ground_size must be positive")
        if m == 0:
            raise ValueError("model needs at least one group")
        covered = set()
        for j, g in enumerate(self.groups):
            if not g:
                raise ValueError(f"group {j} is empty")
            if min(g) < 0 or max(g) >= n:
                raise ValueError(f"group {j} has indices outside 0..{n - 1}")
            covered |= g
        if covered != set(range(n)):
            missing = sorted(set(range(n)) - covered)[:5]
            raise ValueError(f"groups do not cover the ground set (e.g. {missing})")
        if len(set(self.groups)) != m:
            warnings.warn("model contains duplicate groups", stacklevel=3)
        if not 1 <= self.budget_g <= m:
            raise ValueError(f"budget_g={self.budget_g} not in [1, {m}]")
        if not 1 <= self.sparsity_k <= n:
            raise ValueError(f"sparsity_k={self.sparsity_k} not in [1, {n}]")

    @property
    def num_groups(self) -> int:
        return len(self.groups)

    @property
    def k_active(self) -> bool:
        """True when the element budget actually constrains supports."""
        return self.sparsity_k < self.ground_size

    def membership_matrix(self) -> np.ndarray:
        """Dense 0/1 matrix of shape (M, N); row j indicates group j."""
        a = np.zeros((len(self.groups), self.ground_size))
        for j, g in enumerate(self.groups):
            a[j, sorted(g)] = 1.0
        return a

    def groups_containing(self, i: int) -> tuple[int, ...]:
        return tuple(j for j, g in enumerate(self.groups) if i in g)


@dataclass(frozen=True)
class WeightVector:
    """Non-negative element weights plus the norm they were derived for."""

    values: np.ndarray
    p: int = 2

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1:
            raise ValueError("weights must be a 1-d vector")
        if np.any(v < 0):
            raise ValueError("weights must be non-negative")
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.values)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


def _weight_values(w) -> np.ndarray:
    if isinstance(w, WeightVector):
        return w.values
    return np.asarray(w, dtype=float)


@dataclass(frozen=True)
class ProjectionResult:
    """Outcome of a model projection.

    ``support`` is covered by ``selected_groups`` and obeys the element
    budget when one was active; ``covered_weight`` is the summed weight
    over the support.  ``optimal`` is False only when an iterative solver
    stopped at its iteration cap and returned its incumbent.
    """

    selected_groups: tuple[int, ...]
    support: tuple[int, ...]
    covered_weight: float
    projected_vector: np.ndarray | None = None
    optimal: bool = True


def make_projection_result(
    model: GroupModel,
    w,
    selected_groups,
    support,
    signal: np.ndarray | None = None,
    k_constrained: bool = False,
    optimal: bool = True,
) -> ProjectionResult:
    """Assemble a ProjectionResult, checking the structural invariants."""
    wv = _weight_values(w)
    selected = tuple(sorted(selected_groups))
    supp = tuple(sorted(support))
    union = set()
    for j in selected:
        union |= model.groups[j]
    if not set(supp) <= union:
        raise ValueError("support is not covered by the selected groups")
    if k_constrained and len(supp) > model.sparsity_k:
        raise ValueError("support exceeds the element budget")
    value = float(wv[list(supp)].sum()) if supp else 0.0
    vec = apply_support(signal, supp) if signal is not None else None
    return ProjectionResult(selected, supp, value, vec, optimal)


def weights_from_signal(x, p: int = 2) -> WeightVector:
    """Per-element weights of a signal: squares for p=2, magnitudes for p=1."""
    if p not in (1, 2):
        raise ValueError("p must be 1 or 2")
    x = np.asarray(x, dtype=float)
    values = x * x if p == 2 else np.abs(x)
    return WeightVector(values, p)


def frequency(model: GroupModel) -> int:
    """Largest number of groups any single element belongs to."""
    counts = np.zeros(model.ground_size, dtype=int)
    for g in model.groups:
        counts[sorted(g)] += 1
    return int(counts.max())


def apply_support(x, support) -> np.ndarray:
    """Zero out every entry of x outside the given index set."""
    x = np.asarray(x, dtype=float)
    idx = np.fromiter(support, dtype=np.int64, count=len(support)) if len(support) else np.empty(0, dtype=np.int64)
    if len(idx) and (idx.min() < 0 or idx.max() >= len(x)):
        raise IndexError("support index out of range")
    out = np.zeros_like(x)
    if len(idx):
        out[idx] = x[idx]
    return out


def k_heaviest(indices, w, k: int) -> list[int]:
    """The k largest-weight indices, stable: ascending index among ties."""
    wv = _weight_values(w)
    order = sorted(indices, key=lambda i: (-wv[i], i))
    return order[:k]


def brute_force_projection(model: GroupModel, w) -> ProjectionResult:
    """Exhaustive projection oracle: tries every group subset of size <= G.

    Ground truth for the other projectors.  Ties between equal-value
    optima are broken toward the lexicographically smallest sorted tuple
    of group indices.  Refuses instances with C(M, G) > 1e7.
    """
    wv = _weight_values(w)
    m, g_budget, k = model.num_groups, model.budget_g, model.sparsity_k
    if math.comb(m, g_budget) > 10**7:
        raise InstanceTooLargeError(
            f"C({m},{g_budget}) subsets exceed the enumeration guard"
        )
    masks = [np.zeros(model.ground_size, dtype=bool) for _ in range(m)]
    for j, grp in enumerate(model.groups):
        masks[j][sorted(grp)] = True

    best_value = 0.0
    best_sel: tuple[int, ...] = ()
    best_supp: list[int] = []
    for size in range(0, g_budget + 1):
        for combo in itertools.combinations(range(m), size):
            covered = np.zeros(model.ground_size, dtype=bool)
            for j in combo:
                covered |= masks[j]
            idx = np.flatnonzero(covered)
            if len(idx) > k:
                supp = k_heaviest(idx.tolist(), wv, k)
            else:
                supp = idx.tolist()
            value = float(wv[supp].sum()) if supp else 0.0
            if value > best_value or (value == best_value and combo < best_sel):
                best_value, best_sel, best_supp = value, combo, supp
    return make_projection_result(
        model, wv, best_sel, best_supp, k_constrained=model.k_active
    )


# ---------------------------------------------------------------------------
# Text instance format: line 1 "N M G K"; M lines of 1-based group indices;
# optional final line of N weights.


def parse_instance(text: str):
    """Parse the text instance format.

    Returns (GroupModel, weights-or-None).  Raises InstanceFormatError with
    a 1-based line number on malformed input.
    """
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise InstanceFormatError("line 1: empty instance")
    head = lines[0].split()
    if len(head) != 4:
        raise InstanceFormatError("line 1: expected 'N M G K'")
    try:
        n, m, g, k = (int(t) for t in head)
    except ValueError:
        raise InstanceFormatError("line 1: N M G K must be integers") from None
    if len(lines) < 1 + m:
        raise InstanceFormatError(f"line {len(lines) + 1}: missing group line")
    if len(lines) > 2 + m:
        raise InstanceFormatError(f"line {3 + m}: unexpected extra line")
    groups = []
    for ln in range(1, 1 + m):
        toks = lines[ln].split()
        if not toks:
            raise InstanceFormatError(f"line {ln + 1}: empty group")
        try:
            idx = [int(t) for t in toks]
        except ValueError:
            raise InstanceFormatError(f"line {ln + 1}: non-integer index") from None
        if any(i < 1 or i > n for i in idx):
            raise InstanceFormatError(f"line {ln + 1}: index outside 1..{n}")
        groups.append(frozenset(i - 1 for i in idx))
    weights = None
    if len(lines) == 2 + m:
        toks = lines[1 + m].split()
        if len(toks) != n:
            raise InstanceFormatError(f"line {m + 2}: expected {n} weights")
        try:
            weights = np.array([float(t) for t in toks])
        except ValueError:
            raise InstanceFormatError(f"line {m + 2}: non-numeric weight") from None
        if np.any(weights < 0):
            raise InstanceFormatError(f"line {m + 2}: negative weight")
    try:
        model = GroupModel(n, groups, g, k)
    except ValueError as exc:
        raise InstanceFormatError(f"line 1: {exc}") from None
    return model, weights


def load_instance(path):
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())


def save_instance(path, model: GroupModel, weights=None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{model.ground_size} {model.num_groups} "
                 f"{model.budget_g} {model.sparsity_k}\n")
        for g in model.groups:
            fh.write(" ".join(str(i + 1) for i in sorted(g)) + "\n")
        if weights is not None:
            fh.write(" ".join(repr(float(v)) for v in _weight_values(weights)) + "\n")
