"""Head and tail approximations of the group projection.

The head side is the classic greedy coverage heuristic: repeatedly take
the group with the largest uncovered weight.  With ceil(G*log2(1/eps))
rounds it covers at least a (1-eps) fraction of the best G-group
coverage.

The tail side relaxes the projection IP to an LP (group variables sum
to exactly G), solves it with the dense simplex below, and keeps every
group whose fractional value reaches 1/((1+1/eps)*f) where f is the
model frequency; the uncovered weight is then at most (1+eps) times the
optimal G-group residual.
"""

import functools
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .model import GroupModel, InstanceTooLargeError, _weight_values, frequency

__all__ = [
    "HeadResult",
    "TailResult",
    "LPSolution",
    "SimplexError",
    "head_greedy",
    "lp_solve",
    "tail_lp_round",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class HeadResult:
    selected_groups: tuple[int, ...]
    support: tuple[int, ...]
    covered_weight: float
    head_vector: np.ndarray | None = None


@dataclass(frozen=True)
class TailResult:
    selected_groups: tuple[int, ...]
    support: tuple[int, ...]  # all covered indices
    residual_weight: float
    state: object = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class LPSolution:
    u: np.ndarray
    v: np.ndarray
    objective: float
    state: object = field(default=None, repr=False, compare=False)


@functools.lru_cache(maxsize=64)
def _member_matrix(model: GroupModel) -> np.ndarray:
    return model.membership_matrix()


def head_greedy(
    model: GroupModel, w, budget: int, eps: float, signal: np.ndarray | None = None
) -> HeadResult:
    """Greedy coverage head approximation.

    Runs ceil(budget*log2(1/eps)) rounds; each round takes the group of
    maximum remaining weight (lowest index on ties) and zeroes what it
    covers.  Stops early once nothing positive remains.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must be in (0, 1)")
    wv = _weight_values(w).copy()
    rounds = math.ceil(budget * math.log2(1.0 / eps))
    member = _member_matrix(model)
    selected: list[int] = []
    support: set[int] = set()
    taken = np.zeros(model.num_groups, dtype=bool)
    for _ in range(rounds):
        gains = member @ wv
        gains[taken] = -1.0
        j = int(np.argmax(gains))
        if gains[j] <= 0.0:
            break
        selected.append(j)
        taken[j] = True
        idx = sorted(model.groups[j])
        support.update(idx)
        wv[idx] = 0.0
    supp = tuple(sorted(support))
    total = float(_weight_values(w)[list(supp)].sum()) if supp else 0.0
    vec = None
    if signal is not None:
        vec = np.zeros(model.ground_size)
        if supp:
            vec[list(supp)] = np.asarray(signal, dtype=float)[list(supp)]
    return HeadResult(tuple(sorted(selected)), supp, total, vec)


# ---------------------------------------------------------------------------
# Dense primal simplex with variable bounds (two-phase, Dantzig pricing with
# a Bland fallback once the objective stalls).


class SimplexError(RuntimeError):
    pass


class _Simplex:
    """max c.z  s.t.  rows of (A, sense, b),  0 <= z <= ub.

    The tableau carries one slack per inequality and one artificial per
    equality.  Nonbasic variables sit at zero in a sign-flipped
    ("complemented") coordinate whenever they are actually at their
    upper bound; ``complemented`` tracks the flips.
    """

    PIVOT_TOL = 1e-10
    STALL_LIMIT = 60

    def __init__(self, c, a_rows, sense, b, ub):
        m = len(b)
        nstruct = len(c)
        nslack = sum(1 for s in sense if s == "<")
        nart = m - nslack
        ncols = nstruct + nslack + nart
        self.m, self.nstruct, self.ncols = m, nstruct, ncols
        self.T = np.zeros((m, ncols))
        self.T[:, :nstruct] = a_rows
        self.rhs = np.asarray(b, dtype=float).copy()
        if np.any(self.rhs < 0):
            raise ValueError("rows must be stated with non-negative right sides")
        self.ub = np.full(ncols, np.inf)
        self.ub[:nstruct] = ub
        self.basis = np.empty(m, dtype=np.int64)
        self.art_cols = []
        col = nstruct
        for i, s in enumerate(sense):
            self.T[i, col] = 1.0
            self.basis[i] = col
            if s != "<":
                self.art_cols.append(col)
            col += 1
        self.complemented = np.zeros(ncols, dtype=bool)
        self.c_real = np.concatenate([np.asarray(c, dtype=float), np.zeros(ncols - nstruct)])
        self.pivots = 0

    def _reduced(self, c_cur):
        return c_cur - c_cur[self.basis] @ self.T

    def _run(self, c_cur, max_pivots):
        tol = self.PIVOT_TOL
        red = self._reduced(c_cur)
        stall = 0
        bland = False
        while True:
            movable = self.ub > 0
            movable[self.basis] = False
            elig = (red > tol) & movable
            if not elig.any():
                return
            if bland:
                j = int(np.flatnonzero(elig)[0])
            else:
                masked = np.where(elig, red, -np.inf)
                j = int(np.argmax(masked))
            col = self.T[:, j]
            limit = self.ub[j]
            leave_row, at_upper = -1, False
            pos = col > tol
            if pos.any():
                ratios = np.where(pos, np.maximum(self.rhs, 0.0) / np.where(pos, col, 1.0), np.inf)
                r = int(np.argmin(ratios))
                if ratios[r] < limit:
                    limit, leave_row, at_upper = ratios[r], r, False
            ubb = self.ub[self.basis]
            neg = (col < -tol) & np.isfinite(ubb)
            if neg.any():
                ratios = np.where(neg, (ubb - self.rhs) / np.where(neg, -col, 1.0), np.inf)
                r = int(np.argmin(ratios))
                if ratios[r] < limit:
                    limit, leave_row, at_upper = ratios[r], r, True
            if not np.isfinite(limit):
                raise SimplexError("LP is unbounded")
            gain = red[j] * limit
            stall = stall + 1 if gain <= 1e-12 else 0
            if stall > self.STALL_LIMIT:
                bland = True
            if leave_row < 0:
                # bound flip: j travels to its upper bound, no basis change
                self.rhs -= limit * col
                self.T[:, j] *= -1.0
                c_cur[j] *= -1.0
                red[j] *= -1.0
                self.complemented[j] ^= True
                self.pivots += 1
            else:
                r = leave_row
                if at_upper:
                    k = self.basis[r]
                    self.T[r, :] *= -1.0
                    self.T[r, k] = 1.0
                    self.rhs[r] = self.ub[k] - self.rhs[r]
                    self.complemented[k] ^= True
                    c_cur[k] *= -1.0
                piv = self.T[r, j]
                rowr = self.T[r, :] / piv
                rhsr = self.rhs[r] / piv
                f = self.T[:, j].copy()
                f[r] = 0.0
                self.T -= np.outer(f, rowr)
                self.rhs -= f * rhsr
                self.T[r, :] = rowr
                self.rhs[r] = rhsr
                red = red - red[j] * rowr
                self.basis[r] = j
                self.pivots += 1
            if self.pivots > max_pivots:
                raise SimplexError("pivot cap exceeded (cycling suspected)")

    def solve(self, max_pivots=50_000, warm=False):
        if not warm and self.art_cols:
            c1 = np.zeros(self.ncols)
            c1[self.art_cols] = -1.0
            c1[self.complemented] *= -1.0
            self._run(c1, max_pivots)
            infeas = sum(
                self.rhs[i] for i in range(self.m) if self.basis[i] in self.art_cols
            )
            if infeas > 1e-7:
                raise SimplexError("LP is infeasible")
            self.ub[self.art_cols] = 0.0
        c_cur = self.c_real.copy()
        c_cur[self.complemented] *= -1.0
        self._run(c_cur, max_pivots)
        return self.extract()

    def extract(self) -> np.ndarray:
        z = np.zeros(self.ncols)
        z[self.basis] = np.maximum(self.rhs, 0.0)
        z = np.where(self.complemented, self.ub - z, z)
        return z[: self.nstruct]


def _build_relaxation(model: GroupModel, wv, budget):
    n, m = model.ground_size, model.num_groups
    a = np.zeros((n + 1, n + m))
    a[:n, :n] = np.eye(n)
    for j, grp in enumerate(model.groups):
        a[sorted(grp), n + j] = -1.0
    a[n, n:] = 1.0
    sense = ["<"] * n + ["="]
    b = np.concatenate([np.zeros(n), [float(budget)]])
    c = np.concatenate([wv, np.zeros(m)])
    ub = np.ones(n + m)
    return c, a, sense, b, ub


def lp_solve(
    model: GroupModel, w, budget: int, warm_state: object = None
) -> LPSolution:
    """Solve the LP relaxation of the projection (group variables sum to
    the budget), returning an optimal basic solution.

    ``warm_state`` may be the state of a previous solution of the same
    relaxation with different weights; the basis is then reused and only
    phase two runs.  States are single-use.
    """
    wv = _weight_values(w)
    n, m = model.ground_size, model.num_groups
    if n + m > 20_000:
        raise InstanceTooLargeError("dense simplex guard: N+M > 20000")
    if not 1 <= budget <= m:
        raise ValueError("budget must be in [1, M]")

    def cold(weights):
        c, a, sense, b, ub = _build_relaxation(model, weights, budget)
        return _Simplex(c, a, sense, b, ub)

    if warm_state is not None:
        sp = warm_state
        sp.c_real[:n] = wv
        try:
            z = sp.solve(warm=True)
        except SimplexError:
            sp = cold(wv)
            z = sp.solve()
    else:
        sp = cold(wv)
        try:
            z = sp.solve()
        except SimplexError:
            # perturbation fallback for (unlikely) cycling
            jitter = 1.0 + 1e-9 * np.random.default_rng(0).random(n)
            sp = cold(wv * jitter)
            z = sp.solve()
            sp.c_real[:n] = wv
            z = sp.solve(warm=True)

    u, v = z[:n], z[n:]
    obj = float(wv @ u)
    cover = _member_matrix(model).T @ v
    if abs(v.sum() - budget) > 1e-7:
        raise SimplexError(f"group variables sum to {v.sum()}, expected {budget}")
    if np.any(u - cover > 1e-7):
        raise SimplexError("coverage constraint violated at the LP solution")
    return LPSolution(u, v, obj, state=sp)


def tail_lp_round(
    model: GroupModel,
    w,
    budget: int,
    eps: float,
    warm_state: object = None,
) -> TailResult:
    """Tail approximation by LP rounding.

    Keeps the groups whose LP value reaches 1/((1+1/eps)*f); their
    number is at most (1+1/eps)*f*budget and the weight left uncovered
    is at most (1+eps) times the best exact residual.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    wv = _weight_values(w)
    f = frequency(model)
    blowup = (1.0 + 1.0 / eps) * f
    sol = lp_solve(model, wv, budget, warm_state=warm_state)
    keep = np.flatnonzero(sol.v >= 1.0 / blowup - 1e-12)
    support: set[int] = set()
    for j in keep:
        support |= model.groups[j]
    supp = tuple(sorted(support))
    covered = float(wv[list(supp)].sum()) if supp else 0.0
    residual = float(wv.sum()) - covered
    return TailResult(tuple(int(j) for j in keep), supp, residual, state=sol.state)
