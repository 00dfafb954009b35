"""Online bidding with budget pacing and long-term representation constraints.

Queries arrive i.i.d.; at each step the bidder buys the query iff its
Lagrangian coefficient ``ctr v - lam_B ctr cpc - sum_g lam_g ctr (mu_g - g)``
is nonnegative, then takes a projected subgradient step on the duals using
the per-step constraint values

    c_g(x) = x ctr (mu_g - g)         (representation)
    c_B(x) = x ctr cpc - rho          (pacing, rho = B / T)

A hard guard refuses any purchase that would push expected spend past ``B``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import HorizonExhausted, PreconditionError
from .lp import MWConfig, dual_bid, solve_mw
from .model import Instance, Query


@dataclass(frozen=True)
class OnlineState:
    lambda_budget: float
    lambda_group: np.ndarray
    mu: np.ndarray
    budget: float
    horizon: int
    eta: float
    t: int = 0
    spend_so_far: float = 0.0
    utility: float = 0.0
    budget_violation_sum: float = 0.0
    group_violation_sum: np.ndarray | None = None

    @property
    def rho(self) -> float:
        return self.budget / self.horizon

    @classmethod
    def start(cls, mu, budget: float, horizon: int, eta: float | None = None) -> "OnlineState":
        if horizon < 1:
            raise PreconditionError("horizon must be at least 1")
        mu = np.asarray(mu, dtype=float)
        return cls(0.0, np.zeros(mu.shape[0]), mu, float(budget), int(horizon),
                   float(eta if eta is not None else default_eta(horizon)),
                   group_violation_sum=np.zeros(mu.shape[0]))


def _groups(query: Query) -> np.ndarray:
    return np.asarray(query.groups, dtype=float)


def decide(state: OnlineState, query: Query) -> int:
    if state.t >= state.horizon:
        raise HorizonExhausted(f"step {state.t} is past the horizon {state.horizon}")
    cost = query.ctr * query.cpc
    if state.spend_so_far + cost > state.budget:
        return 0
    if query.ctr == 0:
        return int(query.value > 0)  # coefficient is exactly 0
    mu_minus_g = state.mu - _groups(query)
    # ties buy, except that a zero-value tie gains nothing and is skipped
    if state.lambda_budget > 0:
        # same expression as the offline threshold, so T_i >= cpc_i agrees exactly
        b = dual_bid(query.value, mu_minus_g, state.lambda_group, state.lambda_budget)
        return int(b > query.cpc or (b == query.cpc and query.value > 0))
    b = dual_bid(query.value, mu_minus_g, state.lambda_group, 1.0)
    return int(b > 0 or (b == 0 and query.value > 0))


def constraint_values(state: OnlineState, query: Query, x: int) -> tuple[float, np.ndarray]:
    """Budget-pacing and per-group constraint values at this step."""
    c_budget = x * query.ctr * query.cpc - state.rho
    c_group = x * query.ctr * (state.mu - _groups(query))
    return c_budget, c_group


def update(state: OnlineState, query: Query, x: int) -> OnlineState:
    c_budget, c_group = constraint_values(state, query, x)
    return replace(
        state,
        lambda_budget=max(0.0, state.lambda_budget + state.eta * c_budget),
        lambda_group=np.maximum(0.0, state.lambda_group + state.eta * c_group),
        t=state.t + 1,
        spend_so_far=state.spend_so_far + x * query.ctr * query.cpc,
        utility=state.utility + x * query.ctr * query.value,
        budget_violation_sum=state.budget_violation_sum + c_budget,
        group_violation_sum=state.group_violation_sum + c_group,
    )


@dataclass(frozen=True)
class OnlineReport:
    horizon: int
    budget: float
    eta: float
    x: np.ndarray
    spend: np.ndarray
    lambda_budget: np.ndarray
    lambda_group: np.ndarray
    c_budget: np.ndarray
    c_group: np.ndarray
    utility: float
    group_names: tuple[str, ...]
    hindsight_objective: float | None = None

    @property
    def avg_budget_violation(self) -> float:
        return float(self.c_budget.mean())

    @property
    def avg_group_violation(self) -> np.ndarray:
        return self.c_group.mean(axis=0)

    @property
    def positive_violation(self) -> dict[str, float]:
        """Positive part of each time-averaged constraint value."""
        out = {"budget": max(0.0, self.avg_budget_violation)}
        for name, v in zip(self.group_names, self.avg_group_violation):
            out[f"group:{name}"] = max(0.0, float(v))
        return out

    @property
    def regret(self) -> float | None:
        if self.hindsight_objective is None:
            return None
        return self.hindsight_objective - self.utility

    def summary(self) -> dict:
        return {
            "horizon": self.horizon,
            "budget": self.budget,
            "eta": self.eta,
            "utility": self.utility,
            "spend": float(self.spend[-1]) if self.spend.size else 0.0,
            "avg_constraint": {"budget": self.avg_budget_violation,
                               **{f"group:{n}": float(v) for n, v in
                                  zip(self.group_names, self.avg_group_violation)}},
            "positive_violation": self.positive_violation,
            "hindsight_objective": self.hindsight_objective,
            "regret": self.regret,
        }

    def step_rows(self):
        header = (["t", "x", "spend", "lambda_budget"]
                  + [f"lambda_{n}" for n in self.group_names]
                  + ["c_budget"] + [f"c_{n}" for n in self.group_names])
        yield header
        for t in range(self.horizon):
            yield ([t + 1, int(self.x[t]), float(self.spend[t]), float(self.lambda_budget[t])]
                   + [float(v) for v in self.lambda_group[t]]
                   + [float(self.c_budget[t])] + [float(v) for v in self.c_group[t]])


def run_horizon(distribution: Instance, budget: float, horizon: int, eta: float | None = None,
                seed=None, hindsight_delta: float | None = None) -> OnlineReport:
    """Run the bidder on ``horizon`` queries drawn uniformly from ``distribution``.

    With ``hindsight_delta`` set, the realized sequence is also solved offline
    with the MW solver at that accuracy to report regret.
    """
    state = OnlineState.start(distribution.mu, budget, horizon, eta)
    rng = np.random.Generator(np.random.PCG64(seed))
    draws = rng.integers(0, distribution.n, size=horizon)
    queries = distribution.queries
    G = distribution.n_groups
    xs = np.zeros(horizon, dtype=np.int8)
    spend = np.zeros(horizon)
    lam_b = np.zeros(horizon)
    lam_g = np.zeros((horizon, G))
    c_b = np.zeros(horizon)
    c_g = np.zeros((horizon, G))
    for t, k in enumerate(draws):
        q = queries[k]
        x = decide(state, q)
        c_b[t], c_g[t] = constraint_values(state, q, x)
        state = update(state, q, x)
        xs[t] = x
        spend[t] = state.spend_so_far
        lam_b[t] = state.lambda_budget
        lam_g[t] = state.lambda_group

    hindsight = None
    if hindsight_delta is not None:
        seq = distribution.subset(draws).replace(budget=budget,
                                                 ids=[str(t) for t in range(horizon)])
        hindsight = solve_mw(seq, MWConfig(delta=hindsight_delta)).objective
    return OnlineReport(horizon, float(budget), state.eta, xs, spend, lam_b, lam_g, c_b, c_g,
                        state.utility, tuple(distribution.group_names), hindsight)


def default_eta(horizon: int) -> float:
    return 1.0 / math.sqrt(horizon)
