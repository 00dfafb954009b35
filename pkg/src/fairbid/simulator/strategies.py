"""Bidding strategies compared by the simulator.

Single-bid strategies are calibrated on a sample drawn separately from the
population they are later run on.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import PreconditionError
from ..lp import MWConfig, solve_mw
from ..model import Instance
from ..oracle import exact_lp
from ..rounding import flexibility, scaled_allocation
from .auction import Strategy

CDF_TOL = 1e-6


def bid_parity_strategy(sample: Instance, budget: float | None = None,
                        level: str = "affordable") -> Strategy:
    """Largest observed cpc ``b`` whose buy-everything-below cost ``sum ctr cpc`` fits the budget.

    ``level="exhausting"`` instead returns the first level whose cost exceeds
    the budget.  When no level is affordable the smallest cpc is returned
    with a warning.
    """
    if sample.n == 0:
        raise PreconditionError("bid parity calibration needs a nonempty sample")
    if level not in ("affordable", "exhausting"):
        raise PreconditionError(f"unknown level {level!r}")
    budget = sample.budget if budget is None else budget
    levels = np.unique(sample.cpc)
    spend_at = _cost_below(sample, levels)
    fits = np.flatnonzero(spend_at <= budget)
    if fits.size == 0:
        warnings.warn("budget is exhausted below the smallest cpc; bidding it anyway",
                      stacklevel=2)
        return Strategy.single(levels[0], "bid_parity")
    k = fits[-1]
    if level == "exhausting" and k + 1 < levels.size:
        k += 1
    return Strategy.single(levels[k], "bid_parity")


def _group_masks(sample: Instance, group_pair) -> tuple[np.ndarray, np.ndarray]:
    a, b = (sample.membership[:, sample.group_index(g)] if isinstance(g, str)
            else sample.membership[:, g] for g in group_pair)
    if not a.any() or not b.any():
        raise PreconditionError("both groups must be nonempty in the sample")
    return a, b


def empirical_cdf(values: np.ndarray, at: np.ndarray) -> np.ndarray:
    values = np.sort(values)
    return np.searchsorted(values, at, side="right") / values.shape[0]


def _cost_below(sample: Instance, levels: np.ndarray) -> np.ndarray:
    """Sample cost ``sum ctr cpc`` of buying every query with cpc <= each level."""
    order = np.argsort(sample.cpc, kind="stable")
    cum = np.concatenate([[0.0], np.cumsum((sample.ctr * sample.cpc)[order])])
    return cum[np.searchsorted(sample.cpc[order], levels, side="right")]


def bid_outcome_parity_strategy(sample: Instance, group_pair=(0, 1), budget: float | None = None,
                                tol: float = CDF_TOL) -> Strategy:
    """Single bid at which both groups' empirical cpc CDFs agree.

    CDFs are compared at observed cpc values only, and both must be positive.
    Without a budget the smallest agreeing level is returned.  With one, the
    smallest agreeing level whose buy-everything-below cost on the sample
    reaches the budget is returned instead; on continuous data this skips
    chance ties of a handful of individuals in the lower tail, which would
    spend almost nothing.  Both CDFs reach 1 at the largest cpc, which is the
    fallback (with a warning when the CDFs agree nowhere below it).
    """
    a, b = _group_masks(sample, group_pair)
    cpc_a, cpc_b = sample.cpc[a], sample.cpc[b]
    levels = np.unique(np.concatenate([cpc_a, cpc_b]))
    levels = levels[levels > 0]
    if levels.size == 0:
        raise PreconditionError("sample has no positive cpc")
    Fa, Fb = empirical_cdf(cpc_a, levels), empirical_cdf(cpc_b, levels)
    agree = np.flatnonzero((np.abs(Fa - Fb) <= tol) & (Fa > 0) & (Fb > 0))
    agree = agree[agree < levels.size - 1]
    if agree.size == 0:
        warnings.warn("group cpc distributions only meet at the maximum cpc", stacklevel=2)
        return Strategy.single(levels[-1], "bid_and_outcome_parity")
    if budget is None:
        return Strategy.single(levels[agree[0]], "bid_and_outcome_parity")
    enough = agree[_cost_below(sample, levels[agree]) >= budget]
    k = enough[0] if enough.size else levels.size - 1
    return Strategy.single(levels[k], "bid_and_outcome_parity")


def average_bid_parity_strategy(sample: Instance, group_pair, w: float, eps: float,
                                high_fraction: float = 0.1) -> Strategy:
    """Equal average bids per group with very unequal outcomes.

    Bids ``w`` on all of the first group.  On the second group, the last
    ``high_fraction`` of members (in instance order) bid above ``w`` and the
    rest bid ``w - eps``; the high bid is chosen so both group averages equal
    ``w`` (it is ``w + 9 eps`` for a 10% split).
    """
    if not 0 < eps < w:
        raise PreconditionError("need 0 < eps < w")
    if not 0 < high_fraction < 1:
        raise PreconditionError("high_fraction must lie in (0, 1)")
    a, b = _group_masks(sample, group_pair)
    members_b = np.flatnonzero(b & ~a)
    m = members_b.size
    k = max(1, int(round(high_fraction * m)))
    bids = np.zeros(sample.n)
    bids[a] = w
    bids[members_b[: m - k]] = w - eps
    bids[members_b[m - k:]] = w + eps * (m - k) / k
    return Strategy.per_query(bids, "average_bid_parity")


def approximate_parity_strategy(sample: Instance, group_pair, w: float,
                                eps: float) -> Strategy:
    """Bid ``w`` on the first group and ``w - eps`` on the second."""
    if not 0 < eps <= w:
        raise PreconditionError("need 0 < eps <= w")
    a, b = _group_masks(sample, group_pair)
    bids = np.zeros(sample.n)
    bids[b] = w - eps
    bids[a] = w
    return Strategy.per_query(bids, "approximate_parity")


@dataclass(frozen=True)
class AutobidderConfig:
    delta: float = 0.05
    epsilon: float = 0.1
    solver: str = "mw"


def autobidder_strategy(instance: Instance, config: AutobidderConfig | None = None) -> Strategy:
    """Solve the relaxed LP, then bid ``cpc_i`` with the rounding probability ``x'_i``.

    ``solver="exact"`` swaps the MW solver for the HiGHS oracle (no size limit).
    """
    config = config or AutobidderConfig()
    if config.solver == "mw":
        res = solve_mw(instance, MWConfig(delta=config.delta))
        x = res.x
    elif config.solver == "exact":
        res = exact_lp(instance, enforce_size=False)
        x = res.x
    else:
        raise PreconditionError(f"unknown solver {config.solver!r}")
    flex = flexibility(instance, x)
    xp = scaled_allocation(x, flex.s_zero, config.epsilon)
    return Strategy.randomized(xp, "autobidder", fractional=x, flexibility=flex, solve=res)
