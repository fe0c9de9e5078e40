"""Fleet instances, cascade fulfillment and the profit ledger.

A taxi at charge level k can serve any request at level k or below, so
fulfillment resolves top-down: each level consumes what it can and the
surplus spills to the level beneath it.
"""

import numpy as np

from fleetopt import (
    Decision,
    FleetInstance,
    cascade_fulfill,
    check_feasible,
    evaluate_decision,
    profit,
)

# Two supply areas (ids 0, 1), two demand areas (ids 8, 9), three charge
# levels ordered low to high.
inst = FleetInstance(
    supply_areas=(0, 1),
    demand_areas=(8, 9),
    soc_levels=3,
    supply=[[2, 1, 3], [0, 2, 2]],
    demand=[[1, 2, 0], [2, 0, 1]],
    distance_km=[[4.0, 2.0], [3.0, 1.0]],
)
print("supply:\n", inst.supply)
print("demand:\n", inst.demand)
print("per-taxi repositioning cost w = 0.5km rate * distance + 5 booking fee:")
print(inst.reposition_cost)

# Send three high-charge taxis from area 0 to area 8, which only has
# demand at the lower levels: watch the surplus cascade.
x = np.zeros((2, 2, 3), dtype=int)
x[0, 0, 2] = 3
ful = cascade_fulfill(inst, x)
print("\nallocation x[0 -> 8, level 2] = 3")
print("satisfied demand d[8]:", ful.d[0])
print("downward surplus v[8]:", ful.v[0])
# level 2 had no demand, so all three taxis cascade to level 1 (demand 2)
# and the last one reaches level 0 (demand 1)

decision = Decision(x=x, u_hat=np.full((2, 3), 12.0))
print("\nfeasibility violations:", check_feasible(inst, decision))
value = profit(inst, decision, ful)
print(f"profit = revenue (0.2 * 12 + 5 per order) - cost: {value:.2f}")
assert value == evaluate_decision(inst, decision)

# Overloading a supply cell is reported with the offending indices.
bad = np.zeros((2, 2, 3), dtype=int)
bad[0, 0, 0] = 5  # supply[0, level 0] is only 2
violations = check_feasible(inst, Decision(x=bad, u_hat=np.full((2, 3), 12.0)))
print("\noverloaded cell ->", [str(v) for v in violations])
