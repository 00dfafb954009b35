"""
Why equal bids are not enough
=============================

Everyone's winning price is $1.  Two per-group bid schemes look fair on
paper: equal average bids, and bids differing by a few cents.  Both starve
group B.
"""

from fairbid.simulator import (approximate_parity_strategy, average_bid_parity_strategy,
                               equal_price_population, run_auction)

inst = equal_price_population(100, w=1.0)
for strat in (average_bid_parity_strategy(inst, ("A", "B"), 1.0, 0.1),
              approximate_parity_strategy(inst, ("A", "B"), 1.0, 0.01)):
    rep = run_auction(inst, strat, pay_per="impression", seed=0, trials=100)
    a, b = rep.exposures_per_group.mean(axis=0)
    print(f"{strat.description:<20} A {a:.0f}  B {b:.0f}")
