"""The three experiment harnesses, writing their report files.

Report files (json/csv/md) carry only deterministic content and are
byte-reproducible for a seed; measured seconds live in the timings
sidecar. Run this from the repository root; reports land in
/tmp/fleetopt_reports.
"""

import pathlib

from fleetopt.bench import (
    BenchConfig,
    SynthConfig,
    generate_world,
    make_history,
    run_accuracy_experiment,
    run_cuts_experiment,
    run_efficiency_experiment,
)
from fleetopt.forest import TrainConfig, train, train_test_split

out = pathlib.Path("/tmp/fleetopt_reports")
world = generate_world(SynthConfig(seed=42, n_supply=4, n_demand=2, n_days=60))
rows = world.training_rows()
tcfg = TrainConfig(n_trees=10, max_depth=4, min_samples_leaf=4, seed=7)
train_rows, _ = train_test_split(rows, tcfg.test_fraction, tcfg.seed)
forest = train(train_rows, tcfg, world.schema())
history = make_history(world, forest, m=8, seed=3)

n = len(history.variable_names)
cfg = BenchConfig(
    seed=1,
    eval_days=3,
    queries=("Number of pre-allocated taxis", "Average travel price of taxis"),
    fixed_counts=(0, n // 2),
)

print("— efficiency: FULL versus guided fixing —")
rep = run_efficiency_experiment(world, forest, history, cfg, out_dir=str(out))
for agg in rep.aggregates:
    print(f"  fixed={agg['fixed_count']:3d}: mean RF gap {agg['mean_rf_gap_pct']:.3f}%, "
          f"mean nodes {agg['mean_nodes_agent']:.1f} vs {agg['mean_nodes_full']:.1f} (FULL)")

print("\n— cut families —")
rep = run_cuts_experiment(world, forest, history, cfg, out_dir=str(out))
for agg in rep.aggregates:
    print(f"  {agg['cuts']:20s} mean RF gap {agg['mean_rf_gap_pct']:.3f}%  "
          f"node delta {agg['mean_node_delta']:+.1f}  "
          f"cuts {agg['total_gomory']}+{agg['total_cover']}")

print("\n— objective-generation accuracy (offline deterministic guide) —")
inst = world.instance(0)
rep = run_accuracy_experiment(inst, BenchConfig(repetitions=3), out_dir=str(out))
for row in rep.rows:
    def fmt(v):
        return "--" if v is None else f"{v:.2f}"
    print(f"  prompts={row['prompts']:2d}  in-sample result/text "
          f"{fmt(row['in_sample_result'])}/{fmt(row['in_sample_text'])}  "
          f"out-of-sample {fmt(row['out_sample_result'])}/{fmt(row['out_sample_text'])}")

print(f"\nreports written under {out}:")
for path in sorted(out.iterdir()):
    print(f"  {path.name}")
