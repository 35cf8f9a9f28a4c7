"""Command-line surface: project / recover / sweep / selftest."""

import argparse
import json
import sys

import numpy as np

from . import __version__
from .bench import DEFAULT_SERIES, gen_block_model, gen_instance, sweep
from .model import brute_force_projection, load_instance, parse_instance
from .project_benders import benders_project
from .project_dp import dp_project
from .recovery import RecoveryConfig, check_amiht_condition, recover
from .sensing import apply_matrix, load_matrix

SOLVERS = {
    "dp": dp_project,
    "benders": benders_project,
    "brute": brute_force_projection,
}


def _one_based(indices) -> list[int]:
    return [i + 1 for i in indices]


def cmd_project(args) -> int:
    model, weights = load_instance(args.instance)
    if weights is None:
        print("error: instance file has no weight line", file=sys.stderr)
        return 1
    result = SOLVERS[args.solver](model, weights)
    if args.json:
        print(
            json.dumps(
                {
                    "value": result.covered_weight,
                    "groups": _one_based(result.selected_groups),
                    "support": _one_based(result.support),
                    "optimal": result.optimal,
                }
            )
        )
    else:
        print(f"value   {result.covered_weight!r}")
        print(f"groups  {' '.join(map(str, _one_based(result.selected_groups)))}")
        print(f"support {' '.join(map(str, _one_based(result.support)))}")
    return 0


def cmd_recover(args) -> int:
    if args.model:
        model, _ = load_instance(args.model)
    elif args.N:
        model = gen_block_model(args.N, args.overlap, args.G)
    else:
        print("error: give --model FILE or --N", file=sys.stderr)
        return 2
    if args.matrix_file:
        if not args.signal_file:
            print("error: --matrix-file needs --signal-file", file=sys.stderr)
            return 2
        a = load_matrix(args.matrix_file)
        x_true = np.loadtxt(args.signal_file)
        y = apply_matrix(a, x_true)
    else:
        if args.m is None:
            print("error: give --matrix-file/--signal-file or --m", file=sys.stderr)
            return 2
        a, x_true, y = gen_instance(
            model, model.budget_g, args.m, args.matrix, seed=args.seed
        )
    config = RecoveryConfig(
        variant=args.variant,
        projector=args.projector,
        max_iterations=args.max_iterations,
        step_tolerance=args.tolerance,
        p=args.p,
        alpha=args.alpha,
        beta=args.beta,
    )
    result = recover(a, y, model, config, x_true=x_true)
    payload = {
        "variant": args.variant,
        "iterations": result.iterations,
        "converged": result.converged,
        "diverged": result.diverged,
        "rel_error": result.relative_error,
        "support_size": int(np.count_nonzero(result.x_hat)),
        "recovered": bool(
            result.relative_error is not None and result.relative_error < 1e-5
        ),
    }
    if args.json:
        print(json.dumps(payload))
    else:
        for k, v in payload.items():
            print(f"{k:13} {v}")
    return 0


def _parse_series(text: str):
    series = []
    for part in text.split(","):
        variant, _, matrix = part.strip().partition(":")
        if not matrix:
            raise argparse.ArgumentTypeError(
                "series entries look like 'variant:matrix'"
            )
        series.append((variant, matrix))
    return series


def cmd_sweep(args) -> int:
    report = sweep(
        args.N,
        args.G,
        overlap_mode=args.overlap,
        series=args.series,
        trials=args.trials,
        m_step=args.m_step,
        max_m=args.max_m,
        master_seed=args.seed,
        alpha=args.alpha,
        beta=args.beta,
        projector=args.projector,
        workers=args.workers,
        timing=not args.no_timing,
        expander_d=args.expander_d,
        out_dir=args.out_dir,
    )
    summary = report.summary()
    if args.json:
        print(json.dumps(summary))
    else:
        for entry in summary["series"]:
            print(
                f"{entry['algorithm']}/{entry['matrix']}: m# = {entry['m_sharp']}"
            )
            for row in entry["grid"]:
                print(
                    f"  m={row['m']:4d} median_err={row['median_error']:.3e} "
                    f"iters={row['mean_iterations']:.1f} "
                    f"sec={row['mean_seconds']:.3f}"
                )
        if args.out_dir:
            print(f"wrote {args.out_dir}/sweep.csv and plot data")
    return 0


FIG_EXAMPLE = """4 4 1 4
1 2
1 2 3
2 4
3 4
4 1 2 9
"""


def cmd_selftest(args) -> int:
    failures = 0

    def check(name, ok, detail=""):
        nonlocal failures
        if ok:
            print(f"ok   - {name}")
        else:
            failures += 1
            print(f"FAIL - {name} {detail}")

    model, weights = parse_instance(FIG_EXAMPLE)
    for solver_name, solver in SOLVERS.items():
        res = solver(model, weights)
        check(f"{solver_name} projection on the 4-group example", res.covered_weight == 11.0,
              f"value {res.covered_weight}")

    from .model import GroupModel

    rng = np.random.default_rng(20240901)
    agree = True
    for _ in range(60):
        n = int(rng.integers(4, 16))
        m = int(rng.integers(2, 7))
        groups = []
        for _ in range(m):
            size = int(rng.integers(1, max(2, n // 2)))
            groups.append(set(rng.choice(n, size=size, replace=False).tolist()))
        for i in range(n):  # ensure cover
            if not any(i in g for g in groups):
                groups[int(rng.integers(0, m))].add(i)
        g_budget = int(rng.integers(1, min(3, m) + 1))
        k = [n, max(1, n // 2), min(2, n)][int(rng.integers(0, 3))]
        mdl = GroupModel(n, groups, g_budget, k)
        w = rng.integers(0, 10, size=n).astype(float) ** 2
        vb = brute_force_projection(mdl, w).covered_weight
        vd = dp_project(mdl, w).covered_weight
        ve = benders_project(mdl, w).covered_weight
        if not (vb == vd == ve):
            agree = False
            break
    check("oracle equivalence on 60 random instances", agree)

    from .approx import head_greedy, tail_lp_round
    from .model import frequency

    head_ok = tail_ok = True
    for _ in range(30):
        n = int(rng.integers(4, 14))
        m = int(rng.integers(2, 6))
        groups = [set(rng.choice(n, size=int(rng.integers(1, n)), replace=False).tolist()) for _ in range(m)]
        for i in range(n):
            if not any(i in g for g in groups):
                groups[int(rng.integers(0, m))].add(i)
        mdl = GroupModel(n, groups, 1)
        w = rng.random(n)
        opt = brute_force_projection(mdl, w).covered_weight
        eps = 0.25
        head = head_greedy(mdl, w, 1, eps)
        if head.covered_weight < (1 - eps) * opt - 1e-9:
            head_ok = False
        tail = tail_lp_round(mdl, w, 1, 1.0)
        if tail.residual_weight > 2.0 * (w.sum() - opt) + 1e-9:
            tail_ok = False
        if len(tail.selected_groups) > 2 * frequency(mdl):
            tail_ok = False
    check("head guarantee (eps=0.25, G=1) on 30 instances", head_ok)
    check("tail guarantee (eps=1, G=1) on 30 instances", tail_ok)

    from .sensing import apply_adjoint, gen_expander, gen_gaussian

    rip_ok = True
    for t in range(100):
        e = gen_expander(24, 60, 3, seed=t)
        x = np.random.default_rng(t).standard_normal(60)
        if np.abs(apply_matrix(e, x)).sum() > 3 * np.abs(x).sum() + 1e-12:
            rip_ok = False
    check("expander RIP-1 upper bound on 100 draws", rip_ok)

    a = gen_gaussian(15, 40, seed=7)
    x = np.random.default_rng(8).standard_normal(40)
    z = np.random.default_rng(9).standard_normal(15)
    check(
        "adjoint identity <Ax,z> = <x,A*z>",
        abs(apply_matrix(a, x) @ z - x @ apply_adjoint(a, z)) < 1e-10,
    )

    gate_hold = check_amiht_condition(0.95, 1.05)
    gate_fail = check_amiht_condition(0.5, 1.05)
    print(f"     head/tail gate at (0.95, 1.05): {gate_hold}")
    print(f"     head/tail gate at (0.50, 1.05): {gate_fail}")
    check("accuracy gate holds at (0.95, 1.05)", gate_hold is True)
    check("accuracy gate fails at (0.50, 1.05)", gate_fail is False)

    print("selftest:", "PASS" if failures == 0 else f"{failures} FAILURES")
    return 0 if failures == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="groupcs", description="group-sparse recovery toolkit"
    )
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("project", help="project an instance file's weights")
    p.add_argument("--instance", required=True)
    p.add_argument("--solver", choices=sorted(SOLVERS), default="dp")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_project)

    r = sub.add_parser("recover", help="run one recovery")
    r.add_argument("--model", help="instance file with the group model")
    r.add_argument("--N", type=int, help="block-model dimension")
    r.add_argument("--G", type=int, default=5)
    r.add_argument("--overlap", choices=["half", "full"], default="half")
    r.add_argument("--matrix-file")
    r.add_argument("--signal-file")
    r.add_argument("--m", type=int)
    r.add_argument("--matrix", choices=["gaussian", "expander"], default="gaussian")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--variant", choices=["model-iht", "meiht", "am-iht", "am-eiht"],
                   default="model-iht")
    r.add_argument("--projector", choices=sorted(SOLVERS), default="dp")
    r.add_argument("--p", type=int, choices=[1, 2])
    r.add_argument("--alpha", type=float, default=0.95)
    r.add_argument("--beta", type=float, default=1.05)
    r.add_argument("--max-iterations", type=int, default=1000)
    r.add_argument("--tolerance", type=float, default=1e-5)
    r.add_argument("--json", action="store_true")
    r.set_defaults(fn=cmd_recover)

    s = sub.add_parser("sweep", help="measurement sweep on a block model")
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--G", type=int, default=5)
    s.add_argument("--overlap", choices=["half", "full"], default="half")
    s.add_argument("--series", type=_parse_series, default=list(DEFAULT_SERIES),
                   help="comma list of variant:matrix pairs")
    s.add_argument("--trials", type=int, default=20)
    s.add_argument("--m-step", type=int, default=20)
    s.add_argument("--max-m", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--alpha", type=float, default=0.95)
    s.add_argument("--beta", type=float, default=1.05)
    s.add_argument("--projector", choices=sorted(SOLVERS), default="dp")
    s.add_argument("--expander-d", type=int,
                   help="override the formula column degree (N=200 runs conventionally use 7)")
    s.add_argument("--workers", type=int)
    s.add_argument("--no-timing", action="store_true",
                   help="write zero seconds for byte-reproducible output")
    s.add_argument("--out-dir")
    s.add_argument("--json", action="store_true")
    s.set_defaults(fn=cmd_sweep)

    t = sub.add_parser("selftest", help="quick oracle and guarantee checks")
    t.set_defaults(fn=cmd_selftest)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
