"""Monte-Carlo execution of a bidding strategy against a known price landscape.

Each trial shuffles the queries into a random arrival order.  A bid wins
iff it is at least the query's ``cpc``; the winner pays ``cpc`` (second
price) or its bid (first price).  Under pay-per-click a purchase is charged
only if the realized click ``r ~ Ber(ctr)`` happens; pay-per-impression
treats every purchase as a click.  A purchase needs remaining budget at
least the price; the default stop rule ends the trial at the first
purchase that cannot be afforded, the ``"skip"`` rule passes over it.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from ..errors import PreconditionError
from ..model import Instance

AFFORD_TOL = 1e-9
MAX_CHUNK = 10_000
CHUNK_CELLS = 2_000_000


@dataclass(frozen=True)
class Strategy:
    kind: Literal["single_bid", "per_query_bids", "randomized_allocation"]
    bid: float | None = None
    bids: np.ndarray | None = None
    allocation: np.ndarray | None = None
    description: str = ""
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.kind == "single_bid":
            if self.bid is None or self.bid < 0:
                raise PreconditionError("single_bid needs a nonnegative bid")
        elif self.kind == "per_query_bids":
            bids = np.asarray(self.bids, dtype=float)
            if np.any(bids < 0):
                raise PreconditionError("bids must be nonnegative")
            object.__setattr__(self, "bids", bids)
        elif self.kind == "randomized_allocation":
            alloc = np.asarray(self.allocation, dtype=float)
            if np.any((alloc < 0) | (alloc > 1)):
                raise PreconditionError("allocation entries must lie in [0, 1]")
            object.__setattr__(self, "allocation", alloc)
        else:
            raise PreconditionError(f"unknown strategy kind {self.kind!r}")

    @classmethod
    def single(cls, bid: float, description: str = "") -> "Strategy":
        return cls("single_bid", bid=float(bid), description=description or f"single_bid:{bid}")

    @classmethod
    def per_query(cls, bids, description: str = "per_query_bids") -> "Strategy":
        return cls("per_query_bids", bids=bids, description=description)

    @classmethod
    def randomized(cls, allocation, description: str = "randomized_allocation",
                   **meta) -> "Strategy":
        return cls("randomized_allocation", allocation=allocation, description=description,
                   meta=meta)

    def draw_bids(self, instance: Instance, rng: np.random.Generator, trials: int) -> np.ndarray:
        """Per-trial bid matrix of shape ``(trials, n)`` in query order."""
        n = instance.n
        if self.kind == "single_bid":
            return np.full((trials, n), self.bid)
        if self.kind == "per_query_bids":
            if self.bids.shape[0] != n:
                raise PreconditionError("bid vector length does not match instance")
            return np.broadcast_to(self.bids, (trials, n))
        if self.allocation.shape[0] != n:
            raise PreconditionError("allocation length does not match instance")
        take = rng.random((trials, n)) < self.allocation
        return np.where(take, instance.cpc, 0.0)


@dataclass(frozen=True)
class SimulationReport:
    group_names: tuple[str, ...]
    trials: int
    utility: np.ndarray
    spend: np.ndarray
    exposures: np.ndarray
    exposures_per_group: np.ndarray
    clicks_per_group: np.ndarray
    clicks: np.ndarray
    pay_per: str

    def _mean_se(self, a):
        a = np.asarray(a, dtype=float)
        se = a.std(ddof=1) / np.sqrt(a.shape[0]) if a.shape[0] > 1 else 0.0
        return float(a.mean()), float(se)

    @property
    def mean_utility(self) -> float:
        return self._mean_se(self.utility)[0]

    @property
    def utility_stderr(self) -> float:
        return self._mean_se(self.utility)[1]

    @property
    def mean_spend(self) -> float:
        return float(self.spend.mean())

    @property
    def mean_exposures(self) -> float:
        return float(self.exposures.mean())

    @property
    def exposures_stderr(self) -> float:
        return self._mean_se(self.exposures)[1]

    @property
    def _yields(self) -> tuple[np.ndarray, np.ndarray]:
        if self.pay_per == "impression":
            return self.exposures_per_group, self.exposures
        return self.clicks_per_group, self.clicks

    @property
    def representation_ratio(self) -> dict[str, float]:
        """Per-group share of the pooled yield (clicks, or exposures per impression)."""
        per_group, total = self._yields
        tot = total.sum()
        return {name: float(per_group[:, g].sum() / tot) if tot > 0 else 0.0
                for g, name in enumerate(self.group_names)}

    @property
    def ratio_stderr(self) -> dict[str, float]:
        per_group, total = self._yields
        keep = total > 0
        out = {}
        for g, name in enumerate(self.group_names):
            r = per_group[keep, g] / total[keep]
            out[name] = float(r.std(ddof=1) / np.sqrt(r.shape[0])) if r.shape[0] > 1 else 0.0
        return out

    def summary(self) -> dict:
        return {
            "trials": self.trials,
            "utility": self.mean_utility,
            "utility_stderr": self.utility_stderr,
            "spend": self.mean_spend,
            "max_spend": float(self.spend.max()),
            "exposures": self.mean_exposures,
            "exposures_stderr": self.exposures_stderr,
            "exposures_per_group": {n: float(self.exposures_per_group[:, g].mean())
                                    for g, n in enumerate(self.group_names)},
            "clicks_per_group": {n: float(self.clicks_per_group[:, g].mean())
                                 for g, n in enumerate(self.group_names)},
            "representation_ratio": self.representation_ratio,
            "ratio_stderr": self.ratio_stderr,
        }


def _simulate_chunk(instance: Instance, strategy: Strategy, price_model: str, pay_per: str,
                    stop_rule: str, seed_seq, trials: int):
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    n = instance.n
    order = rng.permuted(np.tile(np.arange(n), (trials, 1)), axis=1)
    bids = np.take_along_axis(strategy.draw_bids(instance, rng, trials), order, axis=1)
    cpc = instance.cpc[order]
    if pay_per == "click":
        clicked = rng.random((trials, n)) < instance.ctr[order]
    else:
        clicked = np.ones((trials, n), dtype=bool)
    price = cpc if price_model == "second" else bids
    # a zero bid abstains, even on a zero-price query
    won = (bids > 0) & (bids >= cpc)
    remaining = np.full(trials, instance.budget)
    active = np.ones(trials, dtype=bool)
    bought = np.zeros((trials, n), dtype=bool)
    for k in range(n):
        wants = won[:, k] & active
        afford = remaining >= price[:, k] - AFFORD_TOL
        buy = wants & afford
        if stop_rule == "stop":
            active &= ~(wants & ~afford)
        bought[:, k] = buy
        remaining -= np.where(buy & clicked[:, k], price[:, k], 0.0)
    yielded = bought & clicked
    G = instance.n_groups
    exp_g = np.zeros((trials, G))
    clk_g = np.zeros((trials, G))
    for g in range(G):
        in_g = instance.membership[:, g][order]
        exp_g[:, g] = (bought & in_g).sum(axis=1)
        clk_g[:, g] = (yielded & in_g).sum(axis=1)
    value = instance.value[order]
    return ((yielded * value).sum(axis=1), instance.budget - remaining, bought.sum(axis=1),
            exp_g, clk_g, yielded.sum(axis=1))


def run_auction(instance: Instance, strategy: Strategy,
                price_model: Literal["first", "second"] = "second",
                pay_per: Literal["click", "impression"] = "click",
                seed=None, trials: int = 1, stop_rule: Literal["stop", "skip"] = "stop",
                jobs: int = 1) -> SimulationReport:
    """Simulate ``trials`` independent arrival orders of ``instance`` under ``strategy``.

    Trials are generated in fixed chunks with seeds spawned from ``seed``, so
    results do not depend on ``jobs``.
    """
    if trials < 1:
        raise PreconditionError("trials must be at least 1")
    if price_model not in ("first", "second"):
        raise PreconditionError(f"unknown price model {price_model!r}")
    if pay_per not in ("click", "impression"):
        raise PreconditionError(f"unknown payment basis {pay_per!r}")
    if stop_rule not in ("stop", "skip"):
        raise PreconditionError(f"unknown stop rule {stop_rule!r}")
    chunk = max(1, min(MAX_CHUNK, CHUNK_CELLS // max(instance.n, 1)))
    sizes = [min(chunk, trials - s) for s in range(0, trials, chunk)]
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    args = [(instance, strategy, price_model, pay_per, stop_rule, ss, c)
            for ss, c in zip(seeds, sizes)]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_simulate_chunk, *zip(*args)))
    else:
        parts = [_simulate_chunk(*a) for a in args]
    cols = [np.concatenate(c) for c in zip(*parts)]
    utility, spend, exposures, exp_g, clk_g, clicks = cols
    return SimulationReport(tuple(instance.group_names), trials, utility, spend, exposures,
                            exp_g, clk_g, clicks, pay_per)
