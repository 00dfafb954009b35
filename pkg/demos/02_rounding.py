"""
Rounding fractional allocations
===============================

Pay-per-impression campaigns (ctr = 1) can be rounded deterministically,
group by group.  Click campaigns use randomized rounding that shrinks the
allocation slightly so the constraints survive the coin flips.
"""

import numpy as np

from fairbid import GroupSpec, Instance, deterministic_round, evaluate, exact_lp, flexibility
from fairbid.rounding import randomized_round_trials

rng = np.random.default_rng(0)
n = 300
labels = rng.integers(0, 3, n)
mem = np.eye(3, dtype=bool)[labels]
inst = Instance(rng.uniform(0, 2, n), np.ones(n), rng.uniform(0.1, 1.5, n), mem,
                [GroupSpec("g0", 0.3), GroupSpec("g1", 0.2), GroupSpec("g2", 0.0)], 40.0)

x = exact_lp(inst, enforce_size=False).x
y = deterministic_round(inst, x).y
fx, fy = evaluate(inst, x), evaluate(inst, y)
print(f"fractional: objective {fx.objective:.2f} spend {fx.spend:.2f}")
print(f"rounded:    objective {fy.objective:.2f} spend {fy.spend:.2f}")
# g2 has no target, so it is the unconstrained mass that makes randomized rounding work
print("group slack after rounding (each at most 1 click off):", np.round(fy.group_slack, 3))

# randomized rounding on a click campaign
ctr = rng.uniform(0.5, 1.0, n)
clicks = inst.replace(ctr=ctr, budget=30.0)
x = exact_lp(clicks, enforce_size=False).x
flex = flexibility(clicks, x)
print(f"\ngamma = {flex.gamma:.3f}; rounding with epsilon = 0.3")
Y = randomized_round_trials(clicks, x, flex.s_zero, 0.3, seed=1, trials=500)
r = np.random.default_rng(2).random(Y.shape) < ctr
spend = (Y * r) @ clicks.cpc
print(f"realized spend {spend.mean():.2f} +- {spend.std():.2f} (budget {clicks.budget})")
