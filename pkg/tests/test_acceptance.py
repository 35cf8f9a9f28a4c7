"""Acceptance criteria, one test per criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the PASS/FAIL
line each criterion prints.  Criterion 6 runs a full measurement sweep
and dominates the runtime (budgeted under 30 minutes); everything else
finishes in seconds.
"""

import math
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import pytest

from groupcs import (
    brute_force_projection,
    dp_project,
    frequency,
)
from groupcs.approx import head_greedy, tail_lp_round
from groupcs.bench import run_trial, sweep
from groupcs.project_benders import benders_project
from groupcs.project_dp import projection_decomposition
from groupcs.recovery import RecoveryConfig, check_amiht_condition, recover
from groupcs.sensing import gen_expander
from conftest import random_model

N_SUITE = 500
SWEEP_N = 200
SWEEP_G = 5
SWEEP_D = 7  # conventional column degree for N=200 runs
TRIALS = 20
M_CAP = int(0.7 * SWEEP_N)


def report(num, ok, text):
    print(f"\nACCEPTANCE {num}: {'PASS' if ok else 'FAIL'} - {text}")
    assert ok, text


@pytest.fixture(scope="module")
def suite():
    rng = np.random.default_rng(2024)
    return [random_model(rng) for _ in range(N_SUITE)]


def test_criterion_1_oracle_equivalence(suite):
    t0 = time.time()
    exact_ok = True
    for model, w in suite:
        vb = brute_force_projection(model, w).covered_weight
        ve = benders_project(model, w).covered_weight
        ok = vb == ve
        if projection_decomposition(model).width <= 14:
            ok = ok and dp_project(model, w).covered_weight == vb
        if not ok:
            exact_ok = False
            break
    rng = np.random.default_rng(77)
    float_ok = True
    for model, _ in suite[:100]:
        w = rng.random(model.ground_size)
        vb = brute_force_projection(model, w).covered_weight
        ve = benders_project(model, w).covered_weight
        vd = dp_project(model, w).covered_weight
        if not (
            math.isclose(vb, ve, rel_tol=1e-9) and math.isclose(vb, vd, rel_tol=1e-9)
        ):
            float_ok = False
            break
    elapsed = time.time() - t0
    report(
        1,
        exact_ok and float_ok and elapsed < 120,
        f"dp/benders/brute agree on {N_SUITE} integer-weight instances "
        f"(exact) and 100 float instances (1e-9 rel) in {elapsed:.1f}s",
    )


def test_criterion_2_head_guarantee(suite):
    t0 = time.time()
    violations = 0
    for model, w in suite:
        opt = brute_force_projection(model, w).covered_weight
        for eps in (0.5, 0.25, 0.05):
            h = head_greedy(model, w, model.budget_g, eps)
            if h.covered_weight < (1 - eps) * opt - 1e-9:
                violations += 1
            if len(h.selected_groups) > math.ceil(
                model.budget_g * math.log2(1 / eps)
            ):
                violations += 1
    elapsed = time.time() - t0
    report(
        2,
        violations == 0 and elapsed < 60,
        f"greedy head covers >=(1-eps)*OPT within its group budget on "
        f"{N_SUITE} instances x 3 accuracies, {violations} violations, {elapsed:.1f}s",
    )


def test_criterion_3_tail_guarantee(suite):
    t0 = time.time()
    violations = 0
    for model, w in suite:
        opt = brute_force_projection(model, w).covered_weight
        best_residual = float(np.asarray(w).sum()) - opt
        f = frequency(model)
        for eps in (1.0, 0.5, 1.0 / 19.0):
            t = tail_lp_round(model, w, model.budget_g, eps)
            if t.residual_weight > (1 + eps) * best_residual + 1e-9:
                violations += 1
            if len(t.selected_groups) > math.ceil(
                (1 + 1 / eps) * f * model.budget_g
            ):
                violations += 1
    elapsed = time.time() - t0
    report(
        3,
        violations == 0 and elapsed < 120,
        f"LP-rounding tail keeps residual <=(1+eps)*best on {N_SUITE} "
        f"instances x 3 accuracies, {violations} violations, {elapsed:.1f}s",
    )


def test_criterion_4_rip1_upper_bound():
    # "exactly, no tolerance" means the real-arithmetic inequality; floats
    # are exact binary rationals, so Fractions settle it without rounding
    from fractions import Fraction

    t0 = time.time()
    rng = np.random.default_rng(4242)
    holds = True
    for _ in range(1000):
        m = int(rng.integers(8, 40))
        n = int(rng.integers(10, 80))
        d = int(rng.integers(1, min(m, 8) + 1))
        e = gen_expander(m, n, d, rng)
        x = rng.standard_normal(n)
        xf = [Fraction(v) for v in x]
        rows = [Fraction(0)] * m
        for j in range(n):
            for r in e.rows[j]:
                rows[r] += xf[j]
        lhs = sum(abs(v) for v in rows)
        rhs = d * sum(abs(v) for v in xf)
        if lhs > rhs:
            holds = False
            break
    elapsed = time.time() - t0
    report(
        4,
        holds and elapsed < 10,
        f"||Ax||_1 <= d*||x||_1 held exactly for 1000 random expander pairs, "
        f"{elapsed:.1f}s",
    )


def test_criterion_5_accuracy_gate():
    hold = check_amiht_condition(0.95, 1.05)
    fail = check_amiht_condition(0.5, 1.05)
    report(
        5,
        hold is True and fail is False,
        f"gate(0.95,1.05)={hold}, gate(0.5,1.05)={fail} (also recorded by "
        "`groupcs selftest`)",
    )


SERIES = (
    ("model-iht", "gaussian"),
    ("am-iht", "gaussian"),
    ("meiht", "expander"),
    ("am-eiht", "expander"),
)


@pytest.fixture(scope="module")
def phase_sweep():
    t0 = time.time()
    rep = sweep(
        SWEEP_N,
        SWEEP_G,
        overlap_mode="half",
        series=SERIES,
        trials=TRIALS,
        m_step=20,
        master_seed=0,
        expander_d=SWEEP_D,
        workers=2,
        timing=True,
    )
    return rep, time.time() - t0


@pytest.fixture(scope="module")
def records_at_cap():
    args = [
        (SWEEP_N, "half", SWEEP_G, M_CAP, variant, matrix, trial, 0,
         0.95, 1.05, "dp", False, SWEEP_D)
        for variant, matrix in SERIES
        for trial in range(TRIALS)
    ]
    with ProcessPoolExecutor(max_workers=2) as pool:
        return list(pool.map(_star, args))


def _star(a):
    return run_trial(*a)


def test_criterion_6_phase_behaviour(phase_sweep, records_at_cap):
    rep, elapsed = phase_sweep
    msg = []
    ok = True

    for variant, matrix in SERIES:
        ms = rep.m_sharp[(variant, matrix)]
        msg.append(f"{variant}:m#={ms}")
        if ms is None or ms > M_CAP:
            ok = False

    for variant, matrix in SERIES:
        recs = [
            r for r in records_at_cap
            if r.algorithm == variant and r.matrix == matrix
        ]
        wins = sum(r.rel_error < 1e-5 for r in recs)
        msg.append(f"{variant}@{M_CAP}:{wins}/{TRIALS}")
        if wins < TRIALS / 2:
            ok = False

    for variant in ("meiht", "am-eiht"):
        ms = rep.m_sharp[(variant, "expander")]
        if ms is None:
            ok = False
            continue
        iters = rep.mean_iterations(variant, "expander", ms)
        msg.append(f"{variant}-iters@m#={iters:.0f}")
        if not 20 <= iters <= 200:
            ok = False

    if elapsed >= 1800:
        ok = False
    report(6, ok, f"desk-scale phase behaviour ({', '.join(msg)}, sweep {elapsed:.0f}s)")


def test_criterion_7_exact_oracle_degeneration():
    from groupcs.bench import gen_block_model, gen_instance

    model = gen_block_model(100, "half", 3)
    identical = True
    for trial in range(20):
        a, x, y = gen_instance(model, 3, 70, "gaussian", seed=(700, trial))
        exact = recover(a, y, model, RecoveryConfig(variant="model-iht"))
        degen = recover(
            a, y, model, RecoveryConfig(variant="am-iht", alpha=1.0, beta=1.0)
        )
        if not (
            np.array_equal(exact.x_hat, degen.x_hat)
            and exact.iterations == degen.iterations
            and np.array_equal(exact.step_norms, degen.step_norms)
        ):
            identical = False
            break
    report(
        7,
        identical,
        "am-iht with exact oracles reproduced model-iht bit-for-bit on 20 "
        "random N=100 instances",
    )


def test_criterion_8_sweep_determinism(tmp_path):
    kwargs = dict(
        series=(("model-iht", "gaussian"), ("am-eiht", "expander")),
        trials=6,
        m_step=20,
        max_m=80,
        master_seed=11,
        expander_d=5,
        timing=False,  # wall-clock seconds are the one non-reproducible field
    )
    r1 = sweep(100, 3, workers=1, **kwargs)
    r2 = sweep(100, 3, workers=2, **kwargs)
    p1, p2 = tmp_path / "run1.csv", tmp_path / "run2.csv"
    r1.to_csv(p1)
    r2.to_csv(p2)
    same = p1.read_bytes() == p2.read_bytes()
    report(
        8,
        same,
        "two sweeps with one master seed (different worker counts) wrote "
        "byte-identical CSVs",
    )
