"""Multiplicative-weights solver for the relaxed ad-allocation LP.

The solver searches over candidate objective values ``V``.  For each one it
runs a multiplicative-weights (MW) feasibility loop on the normalized system
``A x >= u`` whose rows are

* objective:   ``ctr_l v_l / V_obj``           >= ``V / V_obj``
* budget:      ``-ctr_l cpc_l / V_budget``     >= ``-min(B, V_budget) / V_budget``
* group ``g``: ``ctr_l (g_l - mu_g) / V_g``    >= ``0``

Every row satisfies ``|A_j x - u_j| <= 1`` on the unit box, so the MW width
is 1.  The per-iteration oracle maximizes ``w^T A x`` over the box, which is
the dual threshold rule ``b(l) >= cpc_l``.  Candidates are scanned from the
largest down, so the first one that never FAILs is the answer.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from numba import njit

from .errors import InvalidDualError, PreconditionError
from .model import FractionalAllocation, Instance, IntegerAllocation, evaluate

_FAIL_TOL = 1e-12

# per-candidate status codes in MWResult.status
SUCCEEDED, FAILED, SKIPPED = 0, 1, -1


@dataclass(frozen=True)
class SolverBounds:
    V_obj: float
    V_budget: float
    V_group: np.ndarray

    @property
    def degenerate(self) -> bool:
        return self.V_obj <= 0


def derive_bounds(instance: Instance) -> SolverBounds:
    """Bounds on the objective and on each constraint's violation over the unit box."""
    ctr = instance.ctr
    spread = np.maximum(instance.mu, 1.0 - instance.mu)
    bounds = SolverBounds(
        V_obj=float(ctr @ instance.value),
        V_budget=float(ctr @ instance.cpc),
        V_group=float(ctr.sum()) * spread,
    )
    if bounds.degenerate:
        warnings.warn("degenerate instance: total expected value is zero", stacklevel=2)
    return bounds


@dataclass(frozen=True)
class MWConfig:
    """Solver parameters.  Unset iteration counts and step are derived from ``delta``.

    Defaults: ``outer_iters = ceil(2/delta)`` candidate values spaced
    ``V_obj/outer_iters`` apart, ``inner_iters = ceil(32 ln(|G|+2) / delta^2)``,
    ``mw_step = delta/4``.  With these the grid error (``delta/2``) plus the
    MW averaging error (``3 delta/8``) stays below ``delta``.
    """

    delta: float = 0.05
    outer_iters: int | None = None
    inner_iters: int | None = None
    mw_step: float | None = None

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise PreconditionError("delta must lie in (0, 1)")
        if self.outer_iters is not None and self.outer_iters < math.ceil(1 / self.delta):
            raise PreconditionError("outer_iters must be at least ceil(1/delta)")
        if self.inner_iters is not None and self.inner_iters < 1:
            raise PreconditionError("inner_iters must be positive")
        if self.mw_step is not None and not 0 < self.mw_step < 0.5:
            raise PreconditionError("mw_step must lie in (0, 1/2)")

    def resolved(self, n_groups: int) -> "MWConfig":
        return MWConfig(
            delta=self.delta,
            outer_iters=self.outer_iters or math.ceil(2 / self.delta),
            inner_iters=self.inner_iters
            or math.ceil(32 * math.log(n_groups + 2) / self.delta**2),
            mw_step=self.mw_step or self.delta / 4,
        )


@dataclass(frozen=True)
class DualCertificate:
    alpha: float
    beta: np.ndarray
    delta: np.ndarray

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float).reshape(-1)
        delta = np.asarray(self.delta, dtype=float).reshape(-1)
        if self.alpha < 0 or np.any(beta < 0) or np.any(delta < 0):
            raise InvalidDualError("dual variables must be nonnegative")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "delta", delta)

    def objective(self, budget: float) -> float:
        return float(self.delta.sum() + self.alpha * budget)

    @classmethod
    def completing(cls, instance: Instance, alpha: float, beta) -> "DualCertificate":
        """Certificate with the smallest box duals making ``(alpha, beta)`` feasible."""
        beta = np.asarray(beta, dtype=float)
        reduced = instance.ctr * (instance.value - alpha * instance.cpc
                                  - (instance.mu[None, :] - instance.membership) @ beta)
        return cls(float(alpha), beta, np.maximum(reduced, 0.0))


@dataclass(frozen=True)
class ThresholdVector:
    """Per-query bid thresholds; ``nan`` marks an undefined entry."""

    t: np.ndarray

    @property
    def defined(self) -> np.ndarray:
        return ~np.isnan(self.t)


def dual_bid(value, mu_minus_g, beta, alpha: float):
    """``(v - sum_g beta_g (mu_g - g)) / alpha`` for one query or a batch.

    Offline thresholds and the online decision rule both go through here so
    that boundary queries compare identically in floating point.
    """
    return (value - np.sum(mu_minus_g * beta, axis=-1)) / alpha


def thresholds(instance: Instance, duals: DualCertificate) -> ThresholdVector:
    """``T_i = (v_i - sum_g beta_g (mu_g - g_i)) / alpha``.

    Undefined (nan) for every query when ``alpha == 0`` and for queries with
    ``ctr_i == 0``.
    """
    if duals.alpha <= 0:
        warnings.warn("alpha = 0: thresholds are undefined", stacklevel=2)
        return ThresholdVector(np.full(instance.n, np.nan))
    t = dual_bid(instance.value, instance.mu[None, :] - instance.membership, duals.beta,
                 duals.alpha)
    t[instance.ctr == 0] = np.nan
    return ThresholdVector(t)


def thresholds_to_bids(tv: ThresholdVector, instance: Instance,
                       auction: Literal["first", "second"] = "second") -> np.ndarray:
    """Second price bids the threshold; first price bids ``cpc_i`` iff ``T_i > cpc_i``."""
    if auction not in ("first", "second"):
        raise PreconditionError(f"unknown auction type {auction!r}")
    undefined = ~tv.defined
    if undefined.any():
        warnings.warn(f"{int(undefined.sum())} undefined thresholds bid 0", stacklevel=2)
    t = np.where(undefined, 0.0, tv.t)
    if auction == "second":
        return np.maximum(t, 0.0)
    return np.where(t > instance.cpc, instance.cpc, 0.0)


def solve_one_dim(instance: Instance, alpha: float, beta) -> IntegerAllocation:
    """Select every query whose dual bid ``b(l)`` reaches its price (ties select)."""
    if alpha <= 0:
        raise InvalidDualError("alpha must be positive")
    beta = np.asarray(beta, dtype=float).reshape(-1)
    if np.any(beta < 0):
        raise InvalidDualError("beta must be nonnegative")
    b = dual_bid(instance.value, instance.mu[None, :] - instance.membership, beta, alpha)
    return IntegerAllocation((b >= instance.cpc).astype(np.int8))


@dataclass(frozen=True)
class MWResult:
    allocation: FractionalAllocation
    achieved_V: float
    objective: float
    spend: float
    group_slack: np.ndarray
    duals: DualCertificate | None
    iterations: int
    candidates: np.ndarray
    status: np.ndarray
    max_width: float
    config: MWConfig
    bounds: SolverBounds
    group_names: tuple[str, ...] = field(default=())

    @property
    def x(self) -> np.ndarray:
        return self.allocation.x

    def report(self) -> dict:
        return {
            "objective": self.objective,
            "spend": self.spend,
            "group_slack": {n: float(s) for n, s in zip(self.group_names, self.group_slack)},
            "delta": self.config.delta,
            "achieved_V": self.achieved_V,
            "iterations": self.iterations,
        }


def _system(instance: Instance, bounds: SolverBounds):
    """Rows of the normalized system, the base right-hand side and row labels."""
    ctr = instance.ctr
    rows = [ctr * instance.value / bounds.V_obj]
    rhs = [0.0]
    kinds = [("obj", -1)]
    if bounds.V_budget > 0:
        rows.append(-ctr * instance.cpc / bounds.V_budget)
        rhs.append(-min(instance.budget, bounds.V_budget) / bounds.V_budget)
        kinds.append(("budget", -1))
    for g in range(instance.n_groups):
        vg = bounds.V_group[g]
        if vg > 0:
            rows.append(ctr * (instance.membership[:, g] - instance.mu[g]) / vg)
            rhs.append(0.0)
            kinds.append(("group", g))
    return np.array(rows), np.array(rhs), kinds


def _extract_duals(instance, bounds, w, kinds) -> DualCertificate | None:
    w_obj = w[0]
    budget_rows = [j for j, (k, _) in enumerate(kinds) if k == "budget"]
    if w_obj <= 0 or not budget_rows:
        return None
    alpha = w[budget_rows[0]] * bounds.V_obj / (bounds.V_budget * w_obj)
    beta = np.zeros(instance.n_groups)
    for j, (kind, g) in enumerate(kinds):
        if kind == "group":
            beta[g] = bounds.V_obj * w[j] / (w_obj * bounds.V_group[g])
    return DualCertificate.completing(instance, alpha, beta)


def solve_mw(instance: Instance, config: MWConfig | None = None,
             bounds: SolverBounds | None = None) -> MWResult:
    """Approximately solve the relaxed LP.

    Returns the averaged MW iterate for the largest candidate value that never
    FAILs.  When every candidate fails, the all-zeros allocation is returned
    with ``achieved_V = 0``.
    """
    config = (config or MWConfig()).resolved(instance.n_groups)
    if bounds is None:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            bounds = derive_bounds(instance)
    T1, T2, eps = config.outer_iters, config.inner_iters, config.mw_step
    n = instance.n
    candidates = np.arange(1, T1 + 1) * (bounds.V_obj / T1)

    def finish(x, V, duals, iters, status, width):
        ev = evaluate(instance, x)
        return MWResult(FractionalAllocation(x), float(V), ev.objective, ev.spend,
                        ev.group_slack, duals, iters, candidates, status, width, config,
                        bounds, tuple(instance.group_names))

    if bounds.degenerate or n == 0:
        return finish(np.zeros(n), 0.0, None, 0, np.full(T1, SKIPPED), 0.0)

    A, u_base, kinds = _system(instance, bounds)
    status, W, x, iters, max_width = _mw_scan(
        A, u_base, candidates / bounds.V_obj, T2, eps, instance.ctr == 0, _FAIL_TOL)
    ok_idx = np.flatnonzero(status == 0)
    if ok_idx.size == 0:
        return finish(np.zeros(n), 0.0, None, iters, status, max_width)
    best = ok_idx[-1]
    x = np.clip(x, 0.0, 1.0)
    duals = _extract_duals(instance, bounds, W, kinds)
    return finish(x, candidates[best], duals, iters, status, max_width)


@njit(cache=True)
def _mw_scan(A, u_base, levels, T2, eps, dead, fail_tol):
    """Run the MW loop for each candidate level, highest first.

    Stops at the first candidate that never FAILs; a FAILed candidate is
    abandoned at once since its weights, and hence its oracle answer, would
    not change again.  Returns per-candidate status, the final weights and
    averaged iterate of the winner, the iteration count and the largest
    observed ``|A_j x - u_j|``.
    """
    m, n = A.shape
    k = levels.shape[0]
    status = np.full(k, SKIPPED)
    log_down = np.log1p(-eps)
    log_up = np.log1p(eps)
    iters = 0
    max_width = 0.0
    u = u_base.copy()
    w = np.ones(m)
    xsum = np.zeros(n)
    ax = np.zeros(m)
    for c in range(k - 1, -1, -1):
        u[0] = levels[c]
        w[:] = 1.0
        xsum[:] = 0.0
        status[c] = SUCCEEDED
        for _ in range(T2):
            iters += 1
            ax[:] = 0.0
            for l in range(n):
                if dead[l]:
                    continue
                s = 0.0
                for j in range(m):
                    s += w[j] * A[j, l]
                if s >= 0.0:
                    xsum[l] += 1.0
                    for j in range(m):
                        ax[j] += A[j, l]
            gain = 0.0
            wsum = 0.0
            for j in range(m):
                gain += w[j] * (ax[j] - u[j])
                wsum += w[j]
            if gain < -fail_tol * wsum:
                status[c] = FAILED
                break
            wmax = 0.0
            for j in range(m):
                mj = ax[j] - u[j]
                if abs(mj) > max_width:
                    max_width = abs(mj)
                mj = min(2.0, max(-2.0, mj))
                # w * (1-eps)^M for M >= 0, w * (1+eps)^(-M) otherwise
                if mj >= 0.0:
                    w[j] *= np.exp(mj * log_down)
                else:
                    w[j] *= np.exp(-mj * log_up)
                if w[j] > wmax:
                    wmax = w[j]
            for j in range(m):
                w[j] /= wmax
        if status[c] == SUCCEEDED:
            return status, w.copy(), xsum / T2, iters, max_width
    return status, w.copy(), xsum / T2, iters, max_width
