"""Auction simulation, strategy library and scenario reproductions."""

from .auction import SimulationReport, Strategy, run_auction
from .population import OccupationSpec, PopulationConfig, gen_synthetic_population
from .scenarios import (SCENARIOS, ComparisonRow, Scenario, build_scenario, compare_strategies,
                        example_3_1, example_3_1_outcome_parity_bids, equal_price_population,
                        load_scenario_file, standard_strategies, synthetic_config,
                        write_comparison_csv)
from .strategies import (AutobidderConfig, approximate_parity_strategy,
                         autobidder_strategy, average_bid_parity_strategy,
                         bid_outcome_parity_strategy, bid_parity_strategy, empirical_cdf)
