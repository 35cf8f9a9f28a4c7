"""A small measurement sweep: how many measurements until recovery?

Walks m over {20, 40, ...} for two algorithm/matrix pairs, 8 trials
each, and reports each series' m#: the first m where the median
relative error drops below 1e-5.  Results land in ./sweep_demo_out as a
CSV, two-column plot-data files, and a gnuplot script.

A full-scale run (N=200, all four algorithms, 20 trials) is the same
call with the defaults; see also `groupcs sweep --help`.
"""

from groupcs.bench import sweep

report = sweep(
    100,
    3,
    overlap_mode="half",
    series=[("model-iht", "gaussian"), ("meiht", "expander")],
    trials=8,
    m_step=20,
    master_seed=42,
    expander_d=5,
    out_dir="sweep_demo_out",
)

for entry in report.summary()["series"]:
    print(f"\n{entry['algorithm']} / {entry['matrix']}: m# = {entry['m_sharp']}")
    for row in entry["grid"]:
        bar = "#" * min(60, int(row["mean_iterations"] / 20))
        print(f"  m={row['m']:3d} median_err={row['median_error']:.2e} "
              f"iters={row['mean_iterations']:6.1f} {bar}")

print("\nwrote sweep_demo_out/sweep.csv and sweep_demo_out/plotdata/*.dat")
print("render with: gnuplot sweep_demo_out/plot.gp")
