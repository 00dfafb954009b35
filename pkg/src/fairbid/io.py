"""Population CSV and instance JSON formats.

Population CSV header: ``id,value,cpc,ctr,group:<name1>,group:<name2>,...``
with ``0``/``1`` group columns.  Instance config JSON::

    {"budget": 5.0, "groups": [{"name": "A", "mu": 0.5}], "population": "pop.csv"}

A relative ``population`` path is resolved against the config file's directory.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .model import GroupSpec, Instance

GROUP_PREFIX = "group:"
BASE_COLUMNS = ["id", "value", "cpc", "ctr"]


def write_population_csv(instance: Instance, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BASE_COLUMNS + [GROUP_PREFIX + g for g in instance.group_names])
        for i in range(instance.n):
            w.writerow([instance.ids[i], repr(float(instance.value[i])),
                        repr(float(instance.cpc[i])), repr(float(instance.ctr[i]))]
                       + [int(b) for b in instance.membership[i]])


def read_population_csv(path):
    """Return ``(ids, value, cpc, ctr, membership, group_names)`` from a population CSV."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ConfigError(f"{path}: empty population file")
    header = rows[0]
    if header[:4] != BASE_COLUMNS:
        raise ConfigError(f"{path}: header must start with {','.join(BASE_COLUMNS)}")
    gcols = header[4:]
    for c in gcols:
        if not c.startswith(GROUP_PREFIX) or len(c) == len(GROUP_PREFIX):
            raise ConfigError(f"{path}: bad group column {c!r}")
    names = [c[len(GROUP_PREFIX):] for c in gcols]
    ids, value, cpc, ctr, mem = [], [], [], [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ConfigError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            ids.append(row[0])
            value.append(float(row[1]))
            cpc.append(float(row[2]))
            ctr.append(float(row[3]))
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}") from None
        bits = row[4:]
        if any(b not in ("0", "1") for b in bits):
            raise ConfigError(f"{path}:{lineno}: group columns must be 0 or 1")
        mem.append([b == "1" for b in bits])
    membership = np.array(mem, dtype=bool).reshape(len(ids), len(names))
    return ids, np.array(value), np.array(cpc), np.array(ctr), membership, names


def instance_from_population(path, budget: float, groups: list[GroupSpec]) -> Instance:
    ids, value, cpc, ctr, membership, names = read_population_csv(path)
    by_name = {g.name: g for g in groups}
    unknown = set(by_name) - set(names)
    if unknown:
        raise ConfigError(f"groups {sorted(unknown)} not present in population columns")
    specs = [by_name.get(name, GroupSpec(name, 0.0)) for name in names]
    return Instance(value, ctr, cpc, membership, specs, budget, ids=ids)


def _require(cfg: dict, key: str, kind):
    if key not in cfg:
        raise ConfigError(f"missing field '{key}'")
    if not isinstance(cfg[key], kind) or isinstance(cfg[key], bool):
        raise ConfigError(f"field '{key}' has wrong type {type(cfg[key]).__name__}")
    return cfg[key]


def parse_groups(raw) -> list[GroupSpec]:
    if not isinstance(raw, list):
        raise ConfigError("field 'groups' must be a list")
    out = []
    for k, g in enumerate(raw):
        if not isinstance(g, dict):
            raise ConfigError(f"field 'groups[{k}]' must be an object")
        name = _require(g, "name", str)
        mu = float(_require(g, "mu", (int, float)))
        if not 0 <= mu <= 1:
            raise ConfigError(f"field 'groups[{k}].mu' must lie in [0, 1]")
        out.append(GroupSpec(name, mu))
    return out


def load_instance_config(path) -> Instance:
    path = Path(path)
    try:
        cfg = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be an object")
    budget = float(_require(cfg, "budget", (int, float)))
    if budget < 0:
        raise ConfigError("field 'budget' must be nonnegative")
    groups = parse_groups(cfg.get("groups", []))
    pop = Path(_require(cfg, "population", str))
    if not pop.is_absolute():
        pop = path.parent / pop
    return instance_from_population(pop, budget, groups)


def save_instance_config(instance: Instance, path, population_name: str | None = None) -> None:
    """Write ``instance`` as a JSON config plus a sibling population CSV."""
    path = Path(path)
    csv_name = population_name or path.with_suffix(".csv").name
    write_population_csv(instance, path.parent / csv_name)
    cfg = {"budget": instance.budget,
           "groups": [{"name": g.name, "mu": g.mu} for g in instance.groups],
           "population": csv_name}
    path.write_text(json.dumps(cfg, indent=2) + "\n", encoding="utf-8")
