"""Rounding fractional allocations to integral bid decisions.

Two routes:

* randomized rounding for gamma-flexible solutions: shrink ``x`` slightly
  (more on unconstrained queries) and draw Bernoulli bids;
* deterministic rounding when ``ctr == 1`` (pay per impression): within each
  group, walk queries from highest to lowest value, carrying the rounded-off
  mass downward.

Random draws use numpy's PCG64 generator; trial streams are split with
``SeedSequence.spawn`` so every trial is reproducible on its own.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError, RefusalError
from .model import FractionalAllocation, Instance, IntegerAllocation

FRACTIONAL_TOL = 1e-9
MAX_CELLS = 64


@dataclass(frozen=True)
class FlexibilityReport:
    s_zero: np.ndarray
    gamma: float
    condition_a: float
    condition_b: float


def unconstrained_mask(instance: Instance) -> np.ndarray:
    """Queries outside every group with a positive target."""
    binding = instance.mu > 0
    return ~np.any(instance.membership[:, binding], axis=1)


def flexibility(instance: Instance, x) -> FlexibilityReport:
    x = np.asarray(getattr(x, "x", x), dtype=float)
    s0 = unconstrained_mask(instance)
    clicks = x * instance.ctr
    total = clicks.sum()
    cond_b = float(clicks @ instance.cpc) / instance.n if instance.n else 0.0
    if total <= 0:
        return FlexibilityReport(np.flatnonzero(s0), 0.0, 0.0, cond_b)
    cond_a = float(clicks[s0].sum() / total)
    return FlexibilityReport(np.flatnonzero(s0), min(cond_a, cond_b), cond_a, cond_b)


def _mask(n: int, s_zero) -> np.ndarray:
    s_zero = np.asarray(s_zero)
    if s_zero.dtype == bool:
        if s_zero.shape != (n,):
            raise PreconditionError("boolean s_zero must have length n")
        return s_zero
    mask = np.zeros(n, dtype=bool)
    mask[s_zero.astype(int)] = True
    return mask


def scaled_allocation(x, s_zero, epsilon: float) -> np.ndarray:
    """``(1-eps) x_i`` on ``s_zero`` and ``(1-eps/2) x_i`` elsewhere."""
    if not 0 < epsilon < 1:
        raise PreconditionError("epsilon must lie in (0, 1)")
    x = np.asarray(getattr(x, "x", x), dtype=float)
    s0 = _mask(x.shape[0], s_zero)
    return np.where(s0, (1 - epsilon) * x, (1 - epsilon / 2) * x)


def representation_precondition(instance: Instance, x) -> np.ndarray:
    """Per group: whether ``sum g_i x_i ctr_i >= mu_g / 2 * sum x_i ctr_i``."""
    x = np.asarray(getattr(x, "x", x), dtype=float)
    clicks = x * instance.ctr
    return clicks @ instance.membership >= 0.5 * instance.mu * clicks.sum() - 1e-12


def randomized_round(instance: Instance, x, s_zero, epsilon: float,
                     seed=None) -> IntegerAllocation:
    """Round ``x`` by independent Bernoulli draws with ``E[y] = scaled_allocation(...)``.

    The high-probability guarantee is stated for ``epsilon`` larger than the
    instance's gamma; other values are accepted as is.
    """
    xp = scaled_allocation(x, s_zero, epsilon)
    if xp.shape[0] != instance.n:
        raise PreconditionError("allocation length does not match instance")
    ok = representation_precondition(instance, x)
    if not ok.all():
        bad = [instance.group_names[g] for g in np.flatnonzero(~ok)]
        warnings.warn(f"representation below half of target for groups {bad}", stacklevel=2)
    rng = np.random.Generator(np.random.PCG64(seed))
    return IntegerAllocation((rng.random(xp.shape[0]) < xp).astype(np.int8))


def randomized_round_trials(instance: Instance, x, s_zero, epsilon: float, seed,
                            trials: int) -> np.ndarray:
    """``trials`` independent roundings, row ``k`` drawn from the ``k``-th spawned stream."""
    xp = scaled_allocation(x, s_zero, epsilon)
    children = np.random.SeedSequence(seed).spawn(trials)
    out = np.empty((trials, xp.shape[0]), dtype=np.int8)
    for k, ss in enumerate(children):
        out[k] = np.random.Generator(np.random.PCG64(ss)).random(xp.shape[0]) < xp
    return out


def _cells(instance: Instance) -> list[np.ndarray]:
    """Index sets of queries sharing one exact group-membership pattern."""
    if instance.n == 0:
        return []
    patterns, inverse = np.unique(instance.membership, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)
    return [np.flatnonzero(inverse == k) for k in range(patterns.shape[0])]


def _fractional(x, idx):
    vals = x[idx]
    return idx[(vals > FRACTIONAL_TOL) & (vals < 1 - FRACTIONAL_TOL)]


def _repair_cells(instance: Instance, x: np.ndarray, cells) -> np.ndarray:
    x = x.copy()
    v, cpc, ctr = instance.value, instance.cpc, instance.ctr
    for cell in cells:
        cell = cell[ctr[cell] > 0]
        while True:
            F = _fractional(x, cell)
            if F.size < 2:
                break
            # i dominates j: strictly more value for no more cost
            dom = (v[F][:, None] > v[F][None, :]) & (cpc[F][:, None] <= cpc[F][None, :])
            hits = np.argwhere(dom)
            if hits.size == 0:
                break
            i, j = F[hits[0, 0]], F[hits[0, 1]]
            # shift click mass from j to i; for ctr = 1 this is
            # x_i <- min(1, x_i + x_j), x_j <- max(0, x_i + x_j - 1)
            mass = x[i] * ctr[i] + x[j] * ctr[j]
            x[i] = min(1.0, mass / ctr[i])
            x[j] = max(0.0, (mass - x[i] * ctr[i]) / ctr[j])
            for k in (i, j):
                if x[k] <= FRACTIONAL_TOL:
                    x[k] = 0.0
                elif x[k] >= 1 - FRACTIONAL_TOL:
                    x[k] = 1.0
    return x


def repair_round_condition(instance: Instance, x) -> FractionalAllocation:
    """Enforce ``v_i > v_j => cpc_i > cpc_j`` among fractional entries of each group.

    Each dominated pair has its click mass moved onto the dominating query,
    which keeps every group's clicks, never raises spend and never lowers
    the objective.
    """
    if not instance.is_disjoint():
        raise RefusalError("repair_round_condition needs disjoint groups")
    x = np.asarray(getattr(x, "x", x), dtype=float)
    return FractionalAllocation(_repair_cells(instance, x, _cells(instance)))


def round_order(instance: Instance, idx) -> np.ndarray:
    """Sort indices by value, then cpc, then id (all ascending)."""
    idx = np.asarray(idx)
    keys = np.lexsort((instance.ids[idx].astype(str), instance.cpc[idx], instance.value[idx]))
    return idx[keys]


def deterministic_round_group(x, order=None) -> np.ndarray:
    """Round one group's fractional entries, already sorted by ascending value.

    ``x`` holds the fractional values in that order (or ``x`` is the full
    vector and ``order`` the sorted indices).  Walking from the top, an entry
    is set to 1 when its value plus the mass rounded away above it reaches 1.
    """
    x = np.asarray(getattr(x, "x", x), dtype=float)
    vals = x if order is None else x[np.asarray(order)]
    if np.any((vals <= 0) | (vals >= 1)):
        raise PreconditionError("deterministic_round_group needs entries strictly inside (0, 1)")
    y = np.zeros(vals.shape[0], dtype=np.int8)
    carry = 0.0
    for j in range(vals.shape[0] - 1, -1, -1):
        if vals[j] + carry >= 1:
            y[j] = 1
            carry += vals[j] - 1
        else:
            carry += vals[j]
    return y


def deterministic_round(instance: Instance, x, repair: bool = True) -> IntegerAllocation:
    """Round a fractional solution of a ``ctr == 1`` instance without randomness.

    Disjoint groups are rounded group by group.  Intersecting groups are
    rounded per membership cell (at most 2^|G| of them), which weakens the
    additive guarantees from 1 to the number of cells.
    """
    if np.any(instance.ctr != 1):
        raise RefusalError("deterministic rounding needs ctr = 1 everywhere; use randomized_round")
    if not instance.is_disjoint() and 2 ** instance.n_groups > MAX_CELLS:
        raise RefusalError(f"too many intersecting groups ({instance.n_groups})")
    x = np.asarray(getattr(x, "x", x), dtype=float).copy()
    if x.shape[0] != instance.n:
        raise PreconditionError("allocation length does not match instance")
    x[x <= FRACTIONAL_TOL] = 0.0
    x[x >= 1 - FRACTIONAL_TOL] = 1.0
    cells = _cells(instance)
    if repair:
        x = _repair_cells(instance, x, cells)
    y = (x >= 1).astype(np.int8)
    for cell in cells:
        F = _fractional(x, cell)
        if F.size:
            order = round_order(instance, F)
            y[order] = deterministic_round_group(x, order)
    return IntegerAllocation(y)
