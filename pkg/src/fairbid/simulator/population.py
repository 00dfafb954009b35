"""Synthetic job-ad populations.

Individuals belong to occupations with a given gender composition.  Value is
1 inside the target occupation and 0 elsewhere; cost-per-click grows with a
lognormal income, and women get a uniform additive bump calibrated on the
sample so that their mean cpc is ``women_cpc_ratio`` times the men's.  Click
rates grow with the share of one's own gender in one's occupation.  Gaussian
noise is then added and values are clipped.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..errors import ConfigError
from ..model import GroupSpec, Instance


@dataclass(frozen=True)
class OccupationSpec:
    name: str
    share: float
    women_share: float
    income_median: float = 60_000.0
    income_sigma: float = 0.35


@dataclass(frozen=True)
class PopulationConfig:
    n: int = 2000
    occupations: tuple[OccupationSpec, ...] = (
        OccupationSpec("target", 0.7, 0.5),
        OccupationSpec("other", 0.3, 0.5),
    )
    target: str = "target"
    cpc_min: float = 0.2
    cpc_per_income: float = 0.5 / 60_000.0
    women_cpc_ratio: float = 1.10
    ctr_low: float = 0.1
    ctr_high: float = 0.6
    value_noise: float = 0.02
    cpc_noise: float = 0.02
    ctr_noise: float = 0.02
    ctr_clip: tuple[float, float] = (0.01, 0.99)
    cpc_floor: float = 0.01
    value_floor: float = 0.0
    budget: float = 0.0
    women_target: float | None = None

    def validate(self) -> None:
        shares = [o.share for o in self.occupations]
        if any(s < 0 for s in shares) or abs(sum(shares) - 1) > 1e-9:
            raise ConfigError("occupation shares must be nonnegative and sum to 1")
        if any(not 0 <= o.women_share <= 1 for o in self.occupations):
            raise ConfigError("women_share must lie in [0, 1]")
        if self.target not in [o.name for o in self.occupations]:
            raise ConfigError(f"target occupation {self.target!r} not among occupations")
        if self.n < 1:
            raise ConfigError("n must be positive")

    def with_women_share(self, share: float) -> "PopulationConfig":
        occ = tuple(replace(o, women_share=share) for o in self.occupations)
        return replace(self, occupations=occ)


def _counts(total: int, shares) -> np.ndarray:
    """Integer counts summing to ``total`` by largest remainder."""
    raw = np.asarray(shares, dtype=float) * total
    counts = np.floor(raw).astype(int)
    rest = total - counts.sum()
    counts[np.argsort(-(raw - counts), kind="stable")[:rest]] += 1
    return counts


def gen_synthetic_population(config: PopulationConfig | None = None, seed=None) -> Instance:
    """Draw a population; groups are ``women`` (target share) and ``men`` (mu = 0)."""
    config = config or PopulationConfig()
    config.validate()
    rng = np.random.Generator(np.random.PCG64(seed))
    occ_counts = _counts(config.n, [o.share for o in config.occupations])
    occ_idx, women = [], []
    for k, (o, c) in enumerate(zip(config.occupations, occ_counts)):
        nw = _counts(c, [o.women_share, 1 - o.women_share])[0]
        occ_idx.append(np.full(c, k))
        women.append(np.arange(c) < nw)
    occ_idx = np.concatenate(occ_idx)
    women = np.concatenate(women)
    perm = rng.permutation(config.n)
    occ_idx, women = occ_idx[perm], women[perm]

    specs = config.occupations
    target_k = [o.name for o in specs].index(config.target)
    median = np.array([o.income_median for o in specs])[occ_idx]
    sigma = np.array([o.income_sigma for o in specs])[occ_idx]
    income = median * np.exp(sigma * rng.standard_normal(config.n))
    w_share = np.array([o.women_share for o in specs])[occ_idx]
    own_share = np.where(women, w_share, 1 - w_share)

    value = (occ_idx == target_k).astype(float)
    value = np.maximum(value + config.value_noise * rng.standard_normal(config.n),
                       config.value_floor)
    cpc = config.cpc_min + config.cpc_per_income * income
    cpc = np.maximum(cpc + config.cpc_noise * rng.standard_normal(config.n), config.cpc_floor)
    if women.any() and (~women).any():
        bump = config.women_cpc_ratio * cpc[~women].mean() - cpc[women].mean()
        cpc = np.where(women, np.maximum(cpc + bump, config.cpc_floor), cpc)
    ctr = config.ctr_low + (config.ctr_high - config.ctr_low) * own_share
    ctr = np.clip(ctr + config.ctr_noise * rng.standard_normal(config.n), *config.ctr_clip)

    mu_w = specs[target_k].women_share if config.women_target is None else config.women_target
    groups = [GroupSpec("women", mu_w), GroupSpec("men", 0.0)]
    membership = np.column_stack([women, ~women])
    return Instance(value, ctr, cpc, membership, groups, config.budget,
                    ids=[f"p{i}" for i in range(config.n)])

