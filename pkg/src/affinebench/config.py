"""Experiment configuration: YAML loading, defaults, and config hashing.

One document drives the whole pipeline.  Every artifact embeds the hash
of the resolved configuration, and each command refuses inputs written
under a different hash.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import yaml

from .errors import ConfigError
from .functions import registry_size


def _paper_counts() -> dict[int, int]:
    counts = {k: 2000 for k in range(2, 6)}
    counts.update({k: 200 for k in range(6, registry_size() + 1)})
    return counts


DEFAULTS: dict = {
    "dimension": 2,
    "output_dir": "out",
    "generator": {
        "counts_per_k": _paper_counts(),
        "instance_pool_size": 100,
        "master_seed": 20240001,
        "component_instances": 5,
    },
    "ela": {
        "sample_factor": 500,
        "repetitions": 5,
        "prune_threshold": 0.9,
        "level_seed": 0,
    },
    "portfolio": {
        "algorithms": [
            "random_search",
            "es_one_plus_one",
            "differential_evolution",
            "particle_swarm",
            "nelder_mead",
            "quasi_newton",
        ],
        "budget_factor": 2000,
        "runs": 15,
        "component_runs": 50,
    },
    "selection": {
        "sizes": [24, 120, 600, 1200, 1800, 3600],
        "repetitions": [10, 10, 5, 3, 3, 2],
        "strategies": ["random", "greedy", "components"],
        "component_instances": [1, 5],
    },
    "selector": {
        "kind": "gbdt",
        "n_rounds": 100,
        "max_depth": 6,
        "learning_rate": 0.3,
        "seed": 1,
    },
}

# the acceptance-scale experiment: 600 generated problems in d=2, five
# optimizers, 5 runs, training sizes aligned with the component sets
DESK_SCALE: dict = {
    "dimension": 2,
    "output_dir": "desk_out",
    "generator": {
        "counts_per_k": {2: 150, 3: 150, 4: 150, 5: 150},
        "instance_pool_size": 100,
        "master_seed": 20240001,
        "component_instances": 5,
    },
    "ela": {"sample_factor": 500, "repetitions": 5, "prune_threshold": 0.9, "level_seed": 0},
    "portfolio": {
        "algorithms": [
            "random_search",
            "es_one_plus_one",
            "differential_evolution",
            "particle_swarm",
            "quasi_newton",
        ],
        "budget_factor": 2000,
        "runs": 5,
        "component_runs": 5,
    },
    "selection": {
        "sizes": [24, 120],
        "repetitions": [5, 5],
        "strategies": ["random", "greedy", "components"],
        "component_instances": [1, 5],
    },
    "selector": {"kind": "gbdt", "n_rounds": 100, "max_depth": 6, "learning_rate": 0.3, "seed": 1},
}


_LEAF_DICTS = {"counts_per_k"}  # open-keyed mappings, replaced wholesale


def _merge(base: dict, override: dict, path="") -> dict:
    out = dict(base)
    for key, value in override.items():
        if key not in base:
            raise ConfigError(f"unknown config key '{path}{key}'")
        if key not in _LEAF_DICTS and isinstance(base[key], dict) and isinstance(value, dict):
            out[key] = _merge(base[key], value, f"{path}{key}.")
        else:
            out[key] = value
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved configuration for one experiment."""

    raw: dict = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return int(self.raw["dimension"])

    @property
    def output_dir(self) -> str:
        return str(self.raw["output_dir"])

    @property
    def generator(self) -> dict:
        return self.raw["generator"]

    @property
    def ela(self) -> dict:
        return self.raw["ela"]

    @property
    def portfolio(self) -> dict:
        return self.raw["portfolio"]

    @property
    def selection(self) -> dict:
        return self.raw["selection"]

    @property
    def selector(self) -> dict:
        return self.raw["selector"]

    @property
    def master_seed(self) -> int:
        return int(self.generator["master_seed"])

    def counts_per_k(self) -> dict[int, int]:
        return {int(k): int(v) for k, v in self.generator["counts_per_k"].items()}

    def hash(self) -> str:
        return config_hash(self.raw)


def _validate(doc: dict) -> None:
    if doc["dimension"] < 1:
        raise ConfigError("dimension must be >= 1")
    for k, v in doc["generator"]["counts_per_k"].items():
        if int(v) < 0:
            raise ConfigError(f"negative count for k={k}")
        if not 1 <= int(k) <= registry_size():
            raise ConfigError(f"k={k} outside registry bounds 1..{registry_size()}")
    sel = doc["selection"]
    if len(sel["sizes"]) != len(sel["repetitions"]):
        raise ConfigError("selection.sizes and selection.repetitions must align")
    from .optimizers import OPTIMIZERS

    for name in doc["portfolio"]["algorithms"]:
        if name not in OPTIMIZERS:
            raise ConfigError(f"unknown optimizer '{name}'")


def resolve_config(overrides: dict | None = None, base: dict | None = None) -> ExperimentConfig:
    doc = _merge(base or DEFAULTS, overrides or {})
    _validate(doc)
    return ExperimentConfig(doc)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh) or {}
    except FileNotFoundError as exc:
        raise ConfigError(f"missing config file {path}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path} must hold a mapping")
    return resolve_config(doc)


def desk_scale_config() -> ExperimentConfig:
    return resolve_config({}, base=DESK_SCALE)


def _stringify_keys(node):
    if isinstance(node, dict):
        return {str(k): _stringify_keys(v) for k, v in node.items()}
    if isinstance(node, (list, tuple)):
        return [_stringify_keys(v) for v in node]
    return node


def config_hash(doc: dict) -> str:
    canonical = json.dumps(_stringify_keys(doc), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def write_config(path, cfg: ExperimentConfig) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(cfg.raw, fh, sort_keys=True)
