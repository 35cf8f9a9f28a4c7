"""Benchmark harness: overlapping block models, random instances, and
measurement sweeps.

A sweep walks the measurement grid {20, 40, ...} per algorithm/matrix
series, running 20 trials at each point, and stops a series at the
first m where the median relative recovery error is at most 1e-5 (the
series' m#).  Results land in a CSV (one row per trial), two-column
plot-data files per series, and a ready-to-run gnuplot script.

Per-trial randomness is derived from (master_seed, N, m, variant,
matrix, trial), so reports are reproducible for any worker count.
"""

import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .model import GroupModel
from .recovery import RecoveryConfig, recover
from .sensing import apply_matrix, gen_expander, gen_gaussian, trial_rng

__all__ = [
    "BlockModelSpec",
    "TrialRecord",
    "SweepReport",
    "gen_block_model",
    "expander_degree",
    "gen_instance",
    "run_trial",
    "sweep",
    "DEFAULT_SERIES",
    "CSV_HEADER",
]

log = logging.getLogger(__name__)

VARIANT_CODE = {"model-iht": 0, "meiht": 1, "am-iht": 2, "am-eiht": 3}
MATRIX_CODE = {"gaussian": 0, "expander": 1}
DEFAULT_SERIES = (
    ("model-iht", "gaussian"),
    ("am-iht", "gaussian"),
    ("meiht", "expander"),
    ("am-eiht", "expander"),
)
CSV_HEADER = "N,m,algorithm,matrix,trial,rel_error,iterations,seconds"
RECOVERY_THRESHOLD = 1e-5


@dataclass(frozen=True)
class BlockModelSpec:
    """Overlapping blocks of length floor(0.02*N).

    ``overlap_mode`` is "half" (consecutive blocks share floor(l/2)
    items, frequency 2) or "full" (share l-1 items, frequency l).
    """

    n: int
    overlap_mode: str = "half"

    def __post_init__(self):
        if self.overlap_mode not in ("half", "full"):
            raise ValueError("overlap_mode must be 'half' or 'full'")

    @property
    def block_length(self) -> int:
        return int(0.02 * self.n)

    @property
    def overlap(self) -> int:
        l = self.block_length
        return l // 2 if self.overlap_mode == "half" else l - 1


def gen_block_model(
    n: int, overlap_mode: str = "half", budget_g: int = 1, sparsity_k=None
) -> GroupModel:
    """Overlapping blocks per BlockModelSpec; the last block is clipped at N."""
    spec = BlockModelSpec(n, overlap_mode)
    l = spec.block_length
    if l < 1:
        raise ValueError(f"N={n} gives block length {l} < 1")
    step = l - spec.overlap
    groups = []
    prev: frozenset = frozenset()
    for s in range(0, n, step):
        block = frozenset(range(s, min(s + l, n)))
        if block <= prev:
            continue
        groups.append(block)
        prev = block
    return GroupModel(n, groups, budget_g, sparsity_k)


def expander_degree(n: int, budget_g: int, block_length: int) -> int:
    """Column degree floor(2*log(N)/log(G*l)); base-independent ratio."""
    gl = budget_g * block_length
    if gl < 2:
        raise ValueError("G*l must be at least 2")
    return max(1, int(2.0 * math.log(n) / math.log(gl)))


def gen_instance(
    model: GroupModel,
    budget_g: int,
    m: int,
    matrix_kind: str,
    seed,
    d: int | None = None,
):
    """Random (A, x, y): support = union of G random groups, Gaussian values.

    ``seed`` may be an int or a tuple key fed to SeedSequence; the matrix
    and the signal use separate child streams.
    """
    key = seed if isinstance(seed, tuple) else (seed,)
    rng_mat = trial_rng(*key, 0)
    rng_sig = trial_rng(*key, 1)
    n = model.ground_size
    if matrix_kind == "gaussian":
        a = gen_gaussian(m, n, rng_mat)
    elif matrix_kind == "expander":
        if d is None:
            gmax = max(len(g) for g in model.groups)
            d = expander_degree(n, budget_g, gmax)
        a = gen_expander(m, n, d, rng_mat)
    else:
        raise ValueError(f"unknown matrix kind {matrix_kind!r}")
    chosen = rng_sig.choice(model.num_groups, size=budget_g, replace=False)
    support = sorted(set().union(*(model.groups[j] for j in chosen)))
    x = np.zeros(n)
    x[support] = rng_sig.standard_normal(len(support))
    y = apply_matrix(a, x)
    return a, x, y


@dataclass(frozen=True)
class TrialRecord:
    n: int
    m: int
    algorithm: str
    matrix: str
    trial: int
    rel_error: float
    iterations: int
    seconds: float

    def csv_row(self) -> str:
        return (
            f"{self.n},{self.m},{self.algorithm},{self.matrix},{self.trial},"
            f"{self.rel_error!r},{self.iterations},{self.seconds:.6f}"
        )


@lru_cache(maxsize=8)
def _block_model(n: int, overlap_mode: str, budget_g: int) -> GroupModel:
    return gen_block_model(n, overlap_mode, budget_g)


def run_trial(
    n: int,
    overlap_mode: str,
    budget_g: int,
    m: int,
    variant: str,
    matrix_kind: str,
    trial: int,
    master_seed: int,
    alpha: float = 0.95,
    beta: float = 1.05,
    projector: str = "dp",
    timing: bool = True,
    expander_d: int | None = None,
) -> TrialRecord:
    """One (matrix, signal, recover) trial; wall time covers recover() only."""
    model = _block_model(n, overlap_mode, budget_g)
    seed_key = (
        master_seed, n, m, VARIANT_CODE[variant], MATRIX_CODE[matrix_kind], trial,
    )
    a, x, y = gen_instance(model, budget_g, m, matrix_kind, seed_key, d=expander_d)
    config = RecoveryConfig(
        variant=variant, projector=projector, alpha=alpha, beta=beta
    )
    t0 = time.perf_counter() if timing else 0.0
    result = recover(a, y, model, config, x_true=x)
    dt = time.perf_counter() - t0 if timing else 0.0
    rel = result.relative_error
    if rel is None or not np.isfinite(rel):
        rel = float("inf")
    return TrialRecord(
        n, m, variant, matrix_kind, trial, rel, result.iterations, dt
    )


@dataclass
class SweepReport:
    n: int
    budget_g: int
    overlap_mode: str
    trials: int
    records: list[TrialRecord] = field(default_factory=list)
    m_sharp: dict[tuple[str, str], int | None] = field(default_factory=dict)

    def series(self) -> list[tuple[str, str]]:
        return sorted({(r.algorithm, r.matrix) for r in self.records})

    def records_at(self, algorithm: str, matrix: str, m: int) -> list[TrialRecord]:
        return [
            r
            for r in self.records
            if r.algorithm == algorithm and r.matrix == matrix and r.m == m
        ]

    def median_error(self, algorithm: str, matrix: str, m: int) -> float:
        errs = [r.rel_error for r in self.records_at(algorithm, matrix, m)]
        return float(np.median(errs))

    def mean_iterations(self, algorithm: str, matrix: str, m: int) -> float:
        its = [r.iterations for r in self.records_at(algorithm, matrix, m)]
        return float(np.mean(its))

    def mean_seconds(self, algorithm: str, matrix: str, m: int) -> float:
        ts = [r.seconds for r in self.records_at(algorithm, matrix, m)]
        return float(np.mean(ts))

    def grid(self, algorithm: str, matrix: str) -> list[int]:
        return sorted(
            {r.m for r in self.records if (r.algorithm, r.matrix) == (algorithm, matrix)}
        )

    def sorted_records(self) -> list[TrialRecord]:
        return sorted(
            self.records, key=lambda r: (r.algorithm, r.matrix, r.m, r.trial)
        )

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(CSV_HEADER + "\n")
            for r in self.sorted_records():
                fh.write(r.csv_row() + "\n")

    def summary(self) -> dict:
        out = {
            "N": self.n,
            "G": self.budget_g,
            "overlap": self.overlap_mode,
            "series": [],
        }
        for alg, mat in self.series():
            ms = self.m_sharp.get((alg, mat))
            entry = {
                "algorithm": alg,
                "matrix": mat,
                "m_sharp": ms if ms is not None else "not reached",
                "grid": [
                    {
                        "m": m,
                        "median_error": self.median_error(alg, mat, m),
                        "mean_iterations": self.mean_iterations(alg, mat, m),
                        "mean_seconds": self.mean_seconds(alg, mat, m),
                    }
                    for m in self.grid(alg, mat)
                ],
            }
            out["series"].append(entry)
        return out

    def write_plot_data(self, out_dir) -> None:
        """Two-column .dat files per series plus a gnuplot script."""
        pd = os.path.join(out_dir, "plotdata")
        os.makedirs(pd, exist_ok=True)
        names = []
        for alg, mat in self.series():
            stem = f"{alg}-{mat}"
            names.append(stem)
            rows = self.grid(alg, mat)
            with open(os.path.join(pd, f"{stem}-error.dat"), "w") as fh:
                for m in rows:
                    fh.write(f"{m} {self.median_error(alg, mat, m)!r}\n")
            with open(os.path.join(pd, f"{stem}-iterations.dat"), "w") as fh:
                for m in rows:
                    fh.write(f"{m} {self.mean_iterations(alg, mat, m)!r}\n")
            with open(os.path.join(pd, f"{stem}-seconds.dat"), "w") as fh:
                for m in rows:
                    fh.write(f"{m} {self.mean_seconds(alg, mat, m)!r}\n")
            ms = self.m_sharp.get((alg, mat))
            with open(os.path.join(pd, f"{stem}-msharp.dat"), "w") as fh:
                fh.write(f"{self.n} {ms if ms is not None else 'nan'}\n")
        with open(os.path.join(out_dir, "plot.gp"), "w") as fh:
            fh.write("set logscale y\nset xlabel 'm'\nset ylabel 'median relative error'\n")
            fh.write("set key outside\n")
            plots = ", ".join(
                f"'plotdata/{s}-error.dat' using 1:2 with linespoints title '{s}'"
                for s in names
            )
            fh.write(f"plot {plots}\n")
            fh.write("pause -1\n")


def _m_grid(n: int, step: int, max_m: int | None) -> list[int]:
    stop = min(max_m or n, n)
    return list(range(step, stop + 1, step))


def sweep(
    n: int,
    budget_g: int,
    overlap_mode: str = "half",
    series=DEFAULT_SERIES,
    trials: int = 20,
    m_step: int = 20,
    max_m: int | None = None,
    master_seed: int = 0,
    alpha: float = 0.95,
    beta: float = 1.05,
    projector: str = "dp",
    workers: int | None = None,
    timing: bool = True,
    expander_d: int | None = None,
    out_dir=None,
) -> SweepReport:
    """Measurement sweep over the grid {m_step, 2*m_step, ...}.

    Each series stops at its m# (median error <= 1e-5 over ``trials``
    trials); series that never get there exhaust the grid and report
    m# as None.  With ``timing=False`` the seconds column is written as
    zero, which makes the CSV byte-reproducible across runs.
    """
    series = [tuple(s) for s in series]
    report = SweepReport(n, budget_g, overlap_mode, trials)
    active = list(series)
    if workers is None:
        workers = min(os.cpu_count() or 1, 8)

    def tasks_for(m, pairs):
        for variant, matrix in pairs:
            for t in range(trials):
                yield (
                    n, overlap_mode, budget_g, m, variant, matrix, t,
                    master_seed, alpha, beta, projector, timing, expander_d,
                )

    def consume(m, pairs, results):
        for rec in results:
            report.records.append(rec)
        for variant, matrix in list(pairs):
            if report.median_error(variant, matrix, m) <= RECOVERY_THRESHOLD:
                report.m_sharp[(variant, matrix)] = m
                active.remove((variant, matrix))
                log.info("%s/%s reached m#=%d", variant, matrix, m)

    grid = _m_grid(n, m_step, max_m)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for m in grid:
                if not active:
                    break
                pairs = list(active)
                results = list(pool.map(_trial_star, tasks_for(m, pairs)))
                consume(m, pairs, results)
    else:
        for m in grid:
            if not active:
                break
            pairs = list(active)
            results = [run_trial(*args) for args in tasks_for(m, pairs)]
            consume(m, pairs, results)
    for pair in active:
        report.m_sharp[pair] = None
        log.info("%s/%s exhausted the grid without recovery", *pair)

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        report.to_csv(os.path.join(out_dir, "sweep.csv"))
        report.write_plot_data(out_dir)
    return report


def _trial_star(args):
    return run_trial(*args)
