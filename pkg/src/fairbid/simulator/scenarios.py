"""Built-in scenarios and budget sweeps over competing strategies."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

from ..errors import ConfigError
from ..model import GroupSpec, Instance
from .auction import SimulationReport, Strategy, run_auction
from .population import OccupationSpec, PopulationConfig, gen_synthetic_population
from .strategies import (AutobidderConfig, autobidder_strategy, bid_outcome_parity_strategy,
                         bid_parity_strategy)


def example_3_1(budget: float = 5.0, mu: float = 0.5) -> Instance:
    """Two groups of 50 with winning prices A: 25@0.1, 20@0.4, 5@1; B: 40@0.1, 10@0.4."""
    counts = {"A": [(0.1, 25), (0.4, 20), (1.0, 5)], "B": [(0.1, 40), (0.4, 10)]}
    cpc, mem, ids = [], [], []
    for g, rows in counts.items():
        for price, k in rows:
            for j in range(k):
                cpc.append(price)
                mem.append([g == "A", g == "B"])
                ids.append(f"{g}{price:g}_{j}")
    n = len(cpc)
    return Instance(np.ones(n), np.ones(n), cpc, mem, [GroupSpec("A", mu), GroupSpec("B", mu)],
                    budget, ids=ids)


def example_3_1_outcome_parity_bids(instance: Instance) -> np.ndarray:
    """Bid 0.1 on the 25 cheap A individuals and on 25 of the cheap B individuals."""
    bids = np.zeros(instance.n)
    for g in range(2):
        cheap = np.flatnonzero(instance.membership[:, g] & (instance.cpc == 0.1))[:25]
        bids[cheap] = 0.1
    return bids


def equal_price_population(n_per_group: int = 100, w: float = 1.0,
                           budget: float | None = None) -> Instance:
    """Two equal groups where every winning price is ``w``; budget defaults to buy-all."""
    n = 2 * n_per_group
    mem = np.zeros((n, 2), dtype=bool)
    mem[:n_per_group, 0] = True
    mem[n_per_group:, 1] = True
    b = w * n if budget is None else budget
    return Instance(np.ones(n), np.ones(n), np.full(n, w), mem,
                    [GroupSpec("A", 0.5), GroupSpec("B", 0.5)], b)


def synthetic_config(women_share: float = 0.5, **overrides) -> PopulationConfig:
    base = PopulationConfig().with_women_share(women_share)
    if women_share < 0.5:
        # the skewed occupation pays better
        occ = tuple(replace(o, income_median=85_000.0) for o in base.occupations)
        base = replace(base, occupations=occ, cpc_min=0.3)
    if "occupations" in overrides:
        overrides["occupations"] = tuple(
            o if isinstance(o, OccupationSpec) else OccupationSpec(**o)
            for o in overrides["occupations"])
    if "ctr_clip" in overrides:
        overrides["ctr_clip"] = tuple(overrides["ctr_clip"])
    try:
        return replace(base, **overrides)
    except TypeError as exc:
        raise ConfigError(f"bad synthetic override: {exc}") from None


SCENARIOS = ("example_3_1", "appendix_a1", "appendix_a2", "synthetic")

# Budget grid and solver accuracy for synthetic sweeps.  The MW error is
# additive in the whole population's value mass, so budgets much below these
# leave the optimum smaller than the error and the group shares drift.
SWEEP_BUDGETS = (80.0, 160.0, 240.0, 320.0)
SWEEP_AUTOBIDDER = AutobidderConfig(delta=0.02, epsilon=0.1)


@dataclass(frozen=True)
class Scenario:
    name: str
    instance: Instance
    pay_per: str
    price_model: str = "second"


def build_scenario(name: str, overrides: Mapping | None = None, seed=None) -> Scenario:
    overrides = dict(overrides or {})
    if name == "example_3_1":
        inst = example_3_1(overrides.pop("budget", 5.0), overrides.pop("mu", 0.5))
        pay_per = "impression"
    elif name in ("appendix_a1", "appendix_a2"):
        inst = equal_price_population(overrides.pop("n_per_group", 100),
                                      overrides.pop("w", 1.0), overrides.pop("budget", None))
        pay_per = "impression"
    elif name == "synthetic":
        share = overrides.pop("women_share", 0.5)
        budget = overrides.pop("budget", 0.0)
        inst = gen_synthetic_population(synthetic_config(share, **overrides), seed).with_budget(
            budget)
        overrides = {}
        pay_per = "click"
    else:
        raise ConfigError(f"unknown scenario {name!r}; expected one of {SCENARIOS}")
    if overrides:
        raise ConfigError(f"unknown overrides for {name}: {sorted(overrides)}")
    return Scenario(name, inst, pay_per)


def load_scenario_file(path, seed=None) -> Scenario:
    try:
        cfg = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(cfg, dict) or not isinstance(cfg.get("scenario"), str):
        raise ConfigError("missing field 'scenario'")
    return build_scenario(cfg["scenario"], cfg.get("overrides", {}), seed)


StrategyFactory = Callable[[Instance], Strategy]


def standard_strategies(sample: Instance, group_pair=("women", "men"),
                        autobidder: AutobidderConfig | None = None) -> dict[str, StrategyFactory]:
    """Bid parity and bid-and-outcome parity calibrated on ``sample``, plus the autobidder.

    Each factory receives the population with the sweep's budget set.
    """
    return {
        "bid_parity": lambda inst: bid_parity_strategy(sample, inst.budget),
        "bid_and_outcome_parity": lambda inst: bid_outcome_parity_strategy(sample, group_pair,
                                                                         inst.budget),
        "autobidder": lambda inst: autobidder_strategy(inst, autobidder),
    }


@dataclass(frozen=True)
class ComparisonRow:
    budget: float
    strategy: str
    report: SimulationReport

    def as_dict(self, group_names) -> dict:
        ratio = self.report.representation_ratio
        se = self.report.ratio_stderr
        row = {"budget": self.budget, "strategy": self.strategy,
               "utility": self.report.mean_utility,
               "utility_stderr": self.report.utility_stderr}
        for g in group_names:
            row[f"ratio_{g}"] = ratio[g]
        for g in group_names:
            row[f"ratio_{g}_stderr"] = se[g]
        row["spend"] = self.report.mean_spend
        return row


def compare_strategies(instance: Instance, strategies: Mapping[str, StrategyFactory | Strategy],
                       budgets, seed=None, trials: int = 1000, pay_per: str = "click",
                       price_model: str = "second", jobs: int = 1) -> list[ComparisonRow]:
    """Utility and representation of each strategy at each budget.

    Every (budget, strategy) cell is simulated with the same seed, so arrival
    orders and click draws are shared across strategies.
    """
    if len(strategies) < 2:
        raise ConfigError("compare_strategies needs at least two strategies")
    rows = []
    for budget in budgets:
        inst = instance.with_budget(float(budget))
        for name, factory in strategies.items():
            strat = factory if isinstance(factory, Strategy) else factory(inst)
            rep = run_auction(inst, strat, price_model, pay_per, seed, trials, jobs=jobs)
            rows.append(ComparisonRow(float(budget), name, rep))
    return rows


def write_comparison_csv(rows: list[ComparisonRow], group_names, path) -> None:
    dicts = [r.as_dict(group_names) for r in rows]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(dicts[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(dicts)
