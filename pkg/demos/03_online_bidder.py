"""
Online primal-dual bidding
==========================

Queries arrive one at a time from a fixed distribution.  The bidder keeps a
budget dual and one dual per group, bids through the same threshold formula
as the offline LP, and never spends past its budget.  Average constraint
violation shrinks as the horizon grows.
"""

import numpy as np

from fairbid import GroupSpec, Instance
from fairbid.online import run_horizon

rng = np.random.default_rng(3)
n = 200
women = rng.random(n) < 0.5
cpc = np.where(women, rng.uniform(0.8, 1.6, n), rng.uniform(0.3, 0.9, n))
dist = Instance(rng.uniform(0.5, 1.5, n), rng.uniform(0.2, 0.8, n), cpc, women[:, None],
                [GroupSpec("women", 0.5)])

for T in (1_000, 3_000, 10_000):
    viol = [run_horizon(dist, 0.1 * T, T, seed=s).positive_violation["group:women"]
            for s in range(10)]
    print(f"T={T:>6}: mean representation violation {np.mean(viol):.4f}")

rep = run_horizon(dist, 100.0, 1000, seed=0, hindsight_delta=0.05)
print("summary:", {k: rep.summary()[k] for k in ("utility", "spend", "regret")})
