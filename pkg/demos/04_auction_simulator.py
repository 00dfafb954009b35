"""
Simulating budgeted second-price auctions
=========================================

Fifty women and fifty men with known winning prices.  A single $1 bid with
a $5 budget buys whoever arrives first and runs out of money unevenly;
hand-picked per-query bids reach 50 impressions split exactly in half.
"""

from fairbid.simulator import (Strategy, example_3_1, example_3_1_outcome_parity_bids,
                               run_auction)

inst = example_3_1()
rep = run_auction(inst, Strategy.single(1.0), "second", "impression", seed=0, trials=100_000)
print(f"single $1 bid: {rep.mean_exposures:.2f} +- {rep.exposures_stderr:.2f} impressions, "
      f"ratio {rep.representation_ratio}")

rep = run_auction(inst, Strategy.per_query(example_3_1_outcome_parity_bids(inst)),
                  "second", "impression", seed=0, trials=1000)
print(f"outcome parity: {rep.mean_exposures:.0f} impressions, spend {rep.mean_spend:.2f}, "
      f"ratio {rep.representation_ratio}")

# first price pays the bid, so the same $1 bid buys only five impressions
rep = run_auction(inst, Strategy.single(1.0), "first", "impression", seed=0, trials=1000)
print(f"first price $1 bid: {rep.mean_exposures:.1f} impressions")
