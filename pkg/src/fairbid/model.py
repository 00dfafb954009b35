"""Domain types and constraint evaluation for the ad-allocation program.

An :class:`Instance` stores its population column-wise as read-only numpy
arrays; :class:`Query` is the row view used for construction and I/O.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, PreconditionError

DEFAULT_TOL = 1e-7


@dataclass(frozen=True)
class Query:
    id: str
    value: float
    ctr: float
    cpc: float
    groups: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0.0 <= self.ctr <= 1.0:
            raise PreconditionError(f"query {self.id}: ctr={self.ctr} outside [0, 1]")
        if self.value < 0:
            raise PreconditionError(f"query {self.id}: negative value {self.value}")
        if self.cpc < 0:
            raise PreconditionError(f"query {self.id}: negative cpc {self.cpc}")
        if any(g not in (0, 1) for g in self.groups):
            raise PreconditionError(f"query {self.id}: group bits must be 0 or 1")


@dataclass(frozen=True)
class GroupSpec:
    name: str
    mu: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.mu <= 1.0:
            raise PreconditionError(f"group {self.name}: mu={self.mu} outside [0, 1]")


def _frozen(a, dtype) -> np.ndarray:
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Instance:
    """A population of queries with a budget and representation targets.

    ``membership[i, g]`` is True when query ``i`` belongs to group ``g``.
    """

    ids: np.ndarray
    value: np.ndarray
    ctr: np.ndarray
    cpc: np.ndarray
    membership: np.ndarray
    groups: tuple[GroupSpec, ...]
    budget: float

    def __init__(self, value, ctr, cpc, membership=None, groups=(), budget=0.0, ids=None):
        value = _frozen(value, float).reshape(-1)
        n = value.shape[0]
        ctr = _frozen(ctr, float).reshape(-1)
        cpc = _frozen(cpc, float).reshape(-1)
        groups = tuple(g if isinstance(g, GroupSpec) else GroupSpec(*g) for g in groups)
        if membership is None:
            membership = np.zeros((n, len(groups)), dtype=bool)
        membership = _frozen(membership, bool).reshape(n, -1) if n else _frozen(
            np.zeros((0, len(groups))), bool)
        if ids is None:
            ids = [str(i) for i in range(n)]
        ids = _frozen([str(i) for i in ids], object)
        if not (ctr.shape[0] == cpc.shape[0] == ids.shape[0] == n):
            raise DimensionError("value, ctr, cpc and ids must have equal length")
        if membership.shape[1] != len(groups):
            raise DimensionError(
                f"membership has {membership.shape[1]} columns for {len(groups)} groups")
        if np.any((ctr < 0) | (ctr > 1)):
            raise PreconditionError("ctr must lie in [0, 1]")
        if np.any(value < 0) or np.any(cpc < 0):
            raise PreconditionError("value and cpc must be nonnegative")
        if budget < 0:
            raise PreconditionError("budget must be nonnegative")
        for name, v in [("ids", ids), ("value", value), ("ctr", ctr), ("cpc", cpc),
                        ("membership", membership), ("groups", groups),
                        ("budget", float(budget))]:
            object.__setattr__(self, name, v)

    @classmethod
    def from_queries(cls, queries: Sequence[Query], budget: float,
                     groups: Sequence[GroupSpec] = ()) -> "Instance":
        report = check_group_membership_consistency(queries, groups)
        if report.mismatched_ids:
            raise DimensionError(
                f"group bit vectors of wrong length for queries {report.mismatched_ids}")
        n = len(queries)
        membership = np.array([q.groups for q in queries], dtype=bool).reshape(n, len(groups))
        return cls(
            value=[q.value for q in queries],
            ctr=[q.ctr for q in queries],
            cpc=[q.cpc for q in queries],
            membership=membership,
            groups=groups,
            budget=budget,
            ids=[q.id for q in queries],
        )

    @property
    def n(self) -> int:
        return self.value.shape[0]

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    @property
    def mu(self) -> np.ndarray:
        return np.array([g.mu for g in self.groups], dtype=float)

    @property
    def group_names(self) -> list[str]:
        return [g.name for g in self.groups]

    @property
    def queries(self) -> list[Query]:
        return [
            Query(str(self.ids[i]), float(self.value[i]), float(self.ctr[i]),
                  float(self.cpc[i]), tuple(int(b) for b in self.membership[i]))
            for i in range(self.n)
        ]

    def group_index(self, name: str) -> int:
        return self.group_names.index(name)

    def is_disjoint(self) -> bool:
        return bool(np.all(self.membership.sum(axis=1) <= 1))

    def replace(self, **changes) -> "Instance":
        kw = dict(value=self.value, ctr=self.ctr, cpc=self.cpc, membership=self.membership,
                  groups=self.groups, budget=self.budget, ids=self.ids)
        kw.update(changes)
        return Instance(**kw)

    def with_budget(self, budget: float) -> "Instance":
        return self.replace(budget=budget)

    def with_mu(self, **mu: float) -> "Instance":
        groups = tuple(GroupSpec(g.name, mu.get(g.name, g.mu)) for g in self.groups)
        return self.replace(groups=groups)

    def subset(self, idx) -> "Instance":
        idx = np.asarray(idx)
        return self.replace(value=self.value[idx], ctr=self.ctr[idx], cpc=self.cpc[idx],
                            membership=self.membership[idx], ids=self.ids[idx])


def group_coefficients(instance: Instance) -> np.ndarray:
    """Return the (n, |G|) matrix ``ctr_i * (mu_g - g_i)``."""
    return instance.ctr[:, None] * (instance.mu[None, :] - instance.membership)


@dataclass(frozen=True)
class ConstraintEvaluation:
    objective: float
    spend: float
    group_slack: np.ndarray
    budget: float
    feasible_within: float = DEFAULT_TOL
    group_names: tuple[str, ...] = field(default=())

    @property
    def budget_feasible(self) -> bool:
        return self.spend <= self.budget + self.feasible_within

    @property
    def groups_feasible(self) -> np.ndarray:
        return self.group_slack <= self.feasible_within

    @property
    def feasible(self) -> bool:
        return self.budget_feasible and bool(np.all(self.groups_feasible))

    def slack_by_name(self) -> dict[str, float]:
        return {name: float(s) for name, s in zip(self.group_names, self.group_slack)}


def _as_alloc(instance: Instance, alloc) -> np.ndarray:
    x = np.asarray(getattr(alloc, "x", getattr(alloc, "y", alloc)), dtype=float).reshape(-1)
    if x.shape[0] != instance.n:
        raise DimensionError(f"allocation has length {x.shape[0]}, instance has {instance.n}")
    return x


def evaluate(instance: Instance, alloc, tol: float = DEFAULT_TOL) -> ConstraintEvaluation:
    """Objective, expected spend and per-group slack of an allocation.

    A group constraint is satisfied when its slack is nonpositive.
    """
    x = _as_alloc(instance, alloc)
    clicks = x * instance.ctr
    return ConstraintEvaluation(
        objective=float(clicks @ instance.value),
        spend=float(clicks @ instance.cpc),
        group_slack=clicks @ (instance.mu[None, :] - instance.membership),
        budget=instance.budget,
        feasible_within=tol,
        group_names=tuple(instance.group_names),
    )


@dataclass(frozen=True)
class FractionalAllocation:
    x: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float).reshape(-1)
        if np.any(x < 0) or np.any(x > 1):
            raise PreconditionError("fractional allocation entries must lie in [0, 1]")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)

    def __len__(self):
        return self.x.shape[0]


@dataclass(frozen=True)
class IntegerAllocation:
    y: np.ndarray

    def __post_init__(self):
        y = np.array(self.y).reshape(-1)
        if not np.all((y == 0) | (y == 1)):
            raise PreconditionError("integer allocation entries must be 0 or 1")
        y = y.astype(np.int8)
        y.setflags(write=False)
        object.__setattr__(self, "y", y)

    def __len__(self):
        return self.y.shape[0]


@dataclass(frozen=True)
class ValidationReport:
    mismatched_ids: list[str]
    vacuous_groups: list[str]

    @property
    def ok(self) -> bool:
        return not self.mismatched_ids


def check_group_membership_consistency(queries: Iterable[Query] | Instance,
                                       groups: Sequence[GroupSpec] | None = None
                                       ) -> ValidationReport:
    """List queries whose bit vector has the wrong length, and groups with mu = 0.

    Members of a mu = 0 group face no constraint through it; that is reported
    for information only.
    """
    if isinstance(queries, Instance):
        groups = queries.groups
        queries = queries.queries
    groups = list(groups or ())
    bad = [q.id for q in queries if len(q.groups) != len(groups)]
    vacuous = [g.name for g in groups if g.mu == 0]
    return ValidationReport(bad, vacuous)
