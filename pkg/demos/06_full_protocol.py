"""End-to-end active-learning runs: robust selection against the baselines.

Runs the full protocol (split, normalize, seed pool labeled by everyone,
then one procured label per round) on the built-in dataset for three
strategies and prints how test RMSE and annotator-selection regret evolve.
The same runs can be produced from the shell:

    crowd-al run --strategy robust_ucb --budget 60 --reps 3 --out records.csv
"""

import numpy as np

from crowdreg import ExperimentConfig, emit_records, run_experiment, summarize

strategies = ("robust_ucb", "instance_only", "random")
checkpoints = (10, 30, 60)

results = {}
for strategy in strategies:
    cfg = ExperimentConfig(
        strategy=strategy,
        budget=60,
        repetitions=3,
        num_annotators=20,
        num_good=16,
        base_seed=3,
    )
    records = run_experiment(cfg)
    results[strategy] = records

print("test RMSE by round (mean over repetitions):")
header = "  round " + "".join(f"{s:>15s}" for s in strategies)
print(header)
for t in (0,) + checkpoints:
    row = f"  {t:5d} "
    for s in strategies:
        vals = [r.rmse for r in results[s] if r.round == t]
        row += f"{np.mean(vals):15.3f}"
    print(row)

print("\ncumulative annotator regret at the final round:")
for s in strategies:
    finals = [row[2] for row in summarize(results[s])]
    print(f"  {s:14s} {np.mean(finals):7.2f}")

emit_records(results["robust_ucb"], "robust_ucb_records.csv")
print("\nwrote robust_ucb_records.csv "
      f"({len(results['robust_ucb'])} rows, fixed 10-column schema)")
