"""A small end-to-end benchmark run with report files.

Each replicate generates a dataset, trains encoders for the combinations
X, XU, XV, XW, fits a prediction head per combination, evaluates test
MSE (both against the observed response and against the noiseless
surface), and runs conditional selection with X preselected.  Reports
land in ./bench_demo_out/.

Run:  python3 demos/05_benchmark.py   (a few minutes; shrink n or
      replicates to go faster)
"""

from sufrep.bench import BenchConfig, emit_report, run_benchmark

cfg = BenchConfig.from_dict(
    {
        "scenario": 2,
        "case": 2,
        "n": 1000,
        "replicates": 3,
        "seed": 0,
        "workers": 2,
        "train": {"outer_iters": 40},
        "selection": {"threshold": "permutation", "num_perms": 99, "level": 0.05},
    }
)

result = run_benchmark(cfg)
print("mean test MSE against the noiseless surface:")
for combo, stats in result.combo_stats.items():
    print(f"  {combo:3s}: {stats['mean_mse_signal']:.3f} ({stats['std_mse_signal']:.3f})")
print("\nselection proportions (X preselected):")
for name in ("U", "V", "W"):
    s = result.selection_stats[name]
    print(f"  {name}: selected {100 * s['selected_proportion']:.0f}%  "
          f"active {100 * s['active_proportion']:.0f}%")

paths = emit_report(result, "bench_demo_out")
print("\nreports written:")
for p in paths:
    print(" ", p)
