"""Random instance families shared by the tests."""

import numpy as np

from fairbid import GroupSpec, Instance


def random_instance(rng, n, n_groups, budget_frac=0.4, mu_high=0.4, disjoint=False,
                    unit_ctr=False, zero_ctr_frac=0.0):
    value = rng.uniform(0.0, 2.0, n)
    cpc = rng.uniform(0.1, 1.5, n)
    ctr = np.ones(n) if unit_ctr else rng.uniform(0.05, 1.0, n)
    if zero_ctr_frac:
        ctr[rng.random(n) < zero_ctr_frac] = 0.0
    if disjoint:
        labels = rng.integers(0, n_groups + 1, n)  # label n_groups means no group
        mem = np.zeros((n, n_groups), dtype=bool)
        for g in range(n_groups):
            mem[:, g] = labels == g
    else:
        mem = rng.random((n, n_groups)) < 0.4
    mus = rng.uniform(0.0, mu_high, n_groups)
    if disjoint and n_groups and mus.sum() > 0.9:
        mus *= 0.9 / mus.sum()
    groups = [GroupSpec(f"g{k}", float(m)) for k, m in enumerate(mus)]
    budget = budget_frac * float((ctr * cpc).sum())
    return Instance(value, ctr, cpc, mem, groups, budget)


def partition_instance(rng, n, n_groups, budget_frac=0.4):
    """Disjoint groups covering every query, ctr = 1, mu summing below 1."""
    labels = rng.integers(0, n_groups, n)
    mem = np.zeros((n, n_groups), dtype=bool)
    mem[np.arange(n), labels] = True
    shares = np.bincount(labels, minlength=n_groups) / n
    mus = shares * rng.uniform(0.3, 1.0, n_groups)
    value = rng.uniform(0.0, 2.0, n)
    cpc = rng.uniform(0.1, 1.5, n)
    groups = [GroupSpec(f"g{k}", float(m)) for k, m in enumerate(mus)]
    return Instance(value, np.ones(n), cpc, mem, groups, budget_frac * float(cpc.sum()))


def e1(mu_b=None):
    """Three queries, budget 1; groups A and B only when ``mu_b`` is given."""
    if mu_b is None:
        return Instance([1, 1, 2], [1, 1, 1], [0.5, 0.5, 1.0], budget=1.0,
                        ids=["q1", "q2", "q3"])
    groups = [GroupSpec("A", 0.0), GroupSpec("B", mu_b)]
    return Instance([1, 1, 2], [1, 1, 1], [0.5, 0.5, 1.0], [[1, 0], [0, 1], [1, 0]], groups,
                    1.0, ids=["q1", "q2", "q3"])
