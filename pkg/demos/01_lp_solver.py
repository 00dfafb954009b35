"""
Solving the allocation LP with multiplicative weights
=====================================================

Three queries, a budget of 1, and a group B that must receive at least 60%
of the clicks.  The approximate solver is compared with the exact LP, and
the optimal duals turn into per-query bid thresholds.
"""

import numpy as np

from fairbid import GroupSpec, Instance, MWConfig, exact_lp, solve_mw, thresholds

inst = Instance(value=[1, 1, 2], ctr=[1, 1, 1], cpc=[0.5, 0.5, 1.0],
                membership=[[1, 0], [0, 1], [1, 0]],
                groups=[GroupSpec("A", 0.0), GroupSpec("B", 0.6)], budget=1.0)

# approximate solve: additive error delta times the population's value mass
res = solve_mw(inst, MWConfig(delta=0.05))
print("MW x        ", np.round(res.x, 3), "objective", round(res.objective, 3))
print("MW slack    ", res.group_slack, "spend", round(res.spend, 3))

# exact LP with its duals
lp = exact_lp(inst)
print("exact x     ", np.round(lp.x, 3) + 0.0, "objective", lp.objective)
print("duals       ", lp.duals.alpha, lp.duals.beta)

# bid b_i = T_i wins query i iff T_i >= cpc_i
tv = thresholds(inst, lp.duals)
print("thresholds  ", np.round(tv.t, 3), "cpc", inst.cpc)
