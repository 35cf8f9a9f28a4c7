"""Measurement matrices and their actions.

Two kinds: dense Gaussian matrices (entries N(0, 1/m)) and sparse
binary "expander" matrices with exactly d ones per column, stored as
per-column row-index lists.  The median operator maps a measurement
vector back to signal space by taking, per element, the median over the
element's d rows.

Randomness: all generators take a seed and derive their stream through
``numpy.random.SeedSequence``.  Experiment code derives one stream per
(matrix, signal, trial) by seeding with the tuple (master_seed, *key),
see :func:`trial_rng`, so runs are reproducible regardless of execution
order or worker count.
"""

import struct
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ExpanderMatrix",
    "NoiseVector",
    "gen_gaussian",
    "gen_expander",
    "apply_matrix",
    "apply_adjoint",
    "median_op",
    "save_matrix",
    "load_matrix",
    "trial_rng",
]

_DENSE_MAGIC = b"GCSDENSE"
_EXP_MAGIC = b"GCSEXPND"


def trial_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Deterministic per-task generator from a master seed and an int key."""
    return np.random.default_rng(np.random.SeedSequence((int(master_seed),) + tuple(int(k) for k in key)))


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True, eq=False)
class NoiseVector:
    """Measurement noise with an optional norm budget eta (p-norm, default 2)."""

    values: np.ndarray
    eta: float | None = None
    p: int = 2

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if self.eta is not None and np.linalg.norm(v, ord=self.p) > self.eta + 1e-12:
            raise ValueError("noise norm exceeds its stated bound")

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True, eq=False)
class ExpanderMatrix:
    """Column-sparse binary matrix: column j has ones at rows[j] (sorted)."""

    m: int
    n: int
    d: int
    rows: np.ndarray  # (n, d) int32, each row sorted, entries distinct

    def __post_init__(self):
        if self.rows.shape != (self.n, self.d):
            raise ValueError("rows array must have shape (n, d)")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.m, self.n)

    def toarray(self) -> np.ndarray:
        a = np.zeros((self.m, self.n))
        for j in range(self.n):
            a[self.rows[j], j] = 1.0
        return a


def gen_gaussian(m: int, n: int, seed=None) -> np.ndarray:
    """Dense i.i.d. N(0,1) matrix scaled by 1/sqrt(m)."""
    if m < 1 or n < 1:
        raise ValueError("matrix dimensions must be positive")
    return _rng(seed).standard_normal((m, n)) / np.sqrt(m)

def gen_expander(m: int, n: int, d: int, seed=None) -> ExpanderMatrix:
    """Random left-d-regular binary matrix: d distinct rows per column."""
    if not 1 <= d <= m:
        raise ValueError(f"need 1 <= d <= m, got d={d}, m={m}")
    rng = _rng(seed)
    rows = np.empty((n, d), dtype=np.int32)
    for j in range(n):
        rows[j] = np.sort(rng.choice(m, size=d, replace=False))
    return ExpanderMatrix(m, n, d, rows)


def apply_matrix(a, x) -> np.ndarray:
    """y = A x for either matrix kind."""
    x = np.asarray(x, dtype=float)
    if isinstance(a, ExpanderMatrix):
        if len(x) != a.n:
            raise ValueError("dimension mismatch")
        return np.bincount(
            a.rows.ravel(), weights=np.repeat(x, a.d), minlength=a.m
        )
    a = np.asarray(a, dtype=float)
    if a.shape[1] != len(x):
        raise ValueError("dimension mismatch")
    return a @ x


def apply_adjoint(a, z) -> np.ndarray:
    """A* z; for binary columns this sums z over each column's rows."""
    z = np.asarray(z, dtype=float)
    if isinstance(a, ExpanderMatrix):
        if len(z) != a.m:
            raise ValueError("dimension mismatch")
        return z[a.rows].sum(axis=1)
    a = np.asarray(a, dtype=float)
    if a.shape[0] != len(z):
        raise ValueError("dimension mismatch")
    return a.T @ z


def median_op(a: ExpanderMatrix, z) -> np.ndarray:
    """Per-element median of z over the element's rows.

    Even d takes the mean of the two middle order statistics (numpy's
    median convention).
    """
    if not isinstance(a, ExpanderMatrix):
        raise TypeError("median operator needs an ExpanderMatrix")
    z = np.asarray(z, dtype=float)
    if len(z) != a.m:
        raise ValueError("dimension mismatch")
    return np.median(z[a.rows], axis=1)


# ---------------------------------------------------------------------------
# Binary save/load.  Dense: 16-byte header (magic, m, n) then float64
# little-endian row-major.  Expander: header (magic, m, n, d) then the
# per-column row indices as little-endian uint32, column by column.


def save_matrix(path, a) -> None:
    with open(path, "wb") as fh:
        if isinstance(a, ExpanderMatrix):
            fh.write(_EXP_MAGIC)
            fh.write(struct.pack("<III", a.m, a.n, a.d))
            fh.write(a.rows.astype("<u4").tobytes())
        else:
            a = np.asarray(a, dtype=float)
            fh.write(_DENSE_MAGIC)
            fh.write(struct.pack("<II", a.shape[0], a.shape[1]))
            fh.write(a.astype("<f8").tobytes())


def load_matrix(path):
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic == _DENSE_MAGIC:
            m, n = struct.unpack("<II", fh.read(8))
            data = np.frombuffer(fh.read(8 * m * n), dtype="<f8")
            if data.size != m * n:
                raise ValueError("truncated dense matrix file")
            return data.reshape(m, n).copy()
        if magic == _EXP_MAGIC:
            m, n, d = struct.unpack("<III", fh.read(12))
            data = np.frombuffer(fh.read(4 * n * d), dtype="<u4")
            if data.size != n * d:
                raise ValueError("truncated expander matrix file")
            rows = data.reshape(n, d).astype(np.int32)
            return ExpanderMatrix(m, n, d, rows)
        raise ValueError("unrecognized matrix file magic")
