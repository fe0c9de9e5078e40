"""Training the profit forest on a seeded synthetic world.

Every synthetic day pairs weather, a fleet instance, the decision the
operator took, and the profit that decision realized under the
demand-response simulator. The forest learns (exogenous + decision) ->
profit; its features are exactly the agent's decision variables plus
the weather block, so it can later sit inside the optimizer.
"""

from fleetopt.bench import SynthConfig, generate_world, simulate_profit
from fleetopt.forest import TrainConfig, evaluate_r2, train, train_test_split

config = SynthConfig(seed=42)  # 8 supply areas, 3 demand areas, 3 levels, 120 days
world = generate_world(config)
print(f"world: {len(world.days)} days, "
      f"{len(world.schema().decision_names)} decision variables per day")

day = world.days[0]
inst = world.instance(0)
print(f"\nday {day.date}: {day.temperature:.1f}C, realized profit "
      f"{day.profit:.2f} for the recorded decision")
again = simulate_profit(inst, day.decision, day.exogenous(), config)
assert again == day.profit  # the simulator is deterministic

rows = world.training_rows()
cfg = TrainConfig(n_trees=25, max_depth=6, min_samples_leaf=2, seed=7)
train_rows, test_rows = train_test_split(rows, cfg.test_fraction, cfg.seed)
forest = train(train_rows, cfg, world.schema())

print(f"\nforest: {forest.n_trees} trees, "
      f"{sum(t.count_nodes()[0] for t in forest.trees)} interior nodes")
print(f"R^2 train: {evaluate_r2(forest, train_rows):.3f}")
print(f"R^2 test:  {evaluate_r2(forest, test_rows):.3f}")

counts = forest.split_counts()
top = sorted(counts.items(), key=lambda kv: -kv[1])[:6]
print("\nmost split-on features:")
for f_idx, count in top:
    print(f"  {forest.schema.names[f_idx]:20s} {count} splits")

# round trip through the versioned JSON document
from fleetopt.forest import Forest

blob = forest.to_json()
assert Forest.from_json(blob).to_json() == blob
print("\nserialization round trip is lossless")
