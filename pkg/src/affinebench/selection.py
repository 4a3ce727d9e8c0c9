"""Training/evaluation instance-set construction.

Three strategies: uniform random, greedy feature-space diversity
(maximin under Manhattan distance), and the component-function sets.
Repetitions of the same (strategy, size) are fully disjoint: repetition
j draws from the pool minus everything earlier repetitions consumed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cityblock, pdist

from .errors import CapacityError, DataError, DomainError
from .functions import registry_size
from .sampling import derive_seed

INFEASIBLE_FILL = 0.5


@dataclass(frozen=True)
class InstanceSet:
    """An ordered subset of problem ids with selection provenance."""

    ids: tuple[int, ...]
    strategy: str
    size: int
    repetition: int
    excluded: frozenset[int] = field(default_factory=frozenset)
    dimension: int = 0

    def __post_init__(self):
        if len(set(self.ids)) != len(self.ids):
            raise DomainError("instance set ids must be distinct")
        if set(self.ids) & self.excluded:
            raise DomainError("instance set overlaps its exclusion lineage")
        if len(self.ids) != self.size:
            raise DomainError("instance set size mismatch")

    @property
    def set_id(self) -> str:
        return f"{self.strategy}_s{self.size}_r{self.repetition}"


@dataclass(frozen=True)
class SelectionPlan:
    """Sizes, per-size repetition counts, and enabled strategies."""

    sizes: tuple[int, ...] = (24, 120, 600, 1200, 1800, 3600)
    repetitions: tuple[int, ...] = (10, 10, 5, 3, 3, 2)
    strategies: tuple[str, ...] = ("random", "greedy", "components")

    def __post_init__(self):
        if len(self.sizes) != len(self.repetitions):
            raise DomainError("sizes and repetitions must align")


class FeatureSpace:
    """Normalized feature matrix indexed by problem id, for selection."""

    def __init__(self, ids: list[int], matrix: np.ndarray):
        matrix = np.asarray(matrix, dtype=float)
        if len(ids) != len(matrix):
            raise DomainError("ids/matrix mismatch")
        self.ids = list(ids)
        # infeasible features enter distance computations as 0.5
        self.matrix = np.where(np.isfinite(matrix), matrix, INFEASIBLE_FILL)
        self._row = {pid: i for i, pid in enumerate(self.ids)}

    def rows(self, ids) -> np.ndarray:
        try:
            return self.matrix[[self._row[i] for i in ids]]
        except KeyError as exc:
            raise DataError(f"no features for problem {exc.args[0]}") from exc


def select_random(pool, s: int, excluded: frozenset[int] | set[int], seed: int, *, dimension: int = 0) -> InstanceSet:
    """Uniform sample without replacement from pool minus exclusions."""
    available = sorted(set(pool) - set(excluded))
    if len(available) < s:
        raise CapacityError(f"pool has {len(available)} candidates, need {s}")
    rng = np.random.default_rng(seed)
    ids = rng.choice(np.asarray(available), size=s, replace=False)
    return InstanceSet(tuple(int(i) for i in ids), "random", s, 0, frozenset(excluded), dimension)


def select_greedy(pool, features: FeatureSpace, s: int, excluded: frozenset[int] | set[int], *, dimension: int = 0) -> InstanceSet:
    """Deterministic maximin diversity selection under Manhattan distance.

    The first pick is the candidate farthest from the candidate-pool
    centroid; every further pick maximizes the minimum distance to the
    already-selected set.  Ties break toward the lowest problem id.
    """
    available = sorted(set(pool) - set(excluded))
    if len(available) < s:
        raise CapacityError(f"pool has {len(available)} candidates, need {s}")
    F = features.rows(available)
    centroid = F.mean(axis=0)
    dist = np.abs(F - centroid).sum(axis=1)
    chosen = [int(np.argmax(dist))]
    mindist = np.abs(F - F[chosen[0]]).sum(axis=1)
    mindist[chosen[0]] = -np.inf
    for _ in range(s - 1):
        nxt = int(np.argmax(mindist))
        chosen.append(nxt)
        np.minimum(mindist, np.abs(F - F[nxt]).sum(axis=1), out=mindist)
        mindist[nxt] = -np.inf
    ids = tuple(available[i] for i in chosen)
    return InstanceSet(ids, "greedy", s, 0, frozenset(excluded), dimension)


def select_components(component_entries, instances_per_function: int, *, dimension: int = 0) -> InstanceSet:
    """The single-component wrapper problems, instances 1..n per function.

    `component_entries` are (problem_id, component_id, instance_id)
    triples for every component problem in the pool.
    """
    if instances_per_function < 1:
        raise DomainError("instances_per_function must be >= 1")
    by_key = {(cid, iid): pid for pid, cid, iid in component_entries}
    ids = []
    for cid in range(1, registry_size() + 1):
        for iid in range(1, instances_per_function + 1):
            pid = by_key.get((cid, iid))
            if pid is None:
                raise DataError(
                    f"pool lacks the component problem for function {cid} instance {iid}"
                )
            ids.append(pid)
    return InstanceSet(tuple(ids), "components", len(ids), 0, frozenset(), dimension)


def avg_pairwise_manhattan(instance_set: InstanceSet | list[int], features: FeatureSpace) -> float:
    """Mean Manhattan distance over all unordered pairs of the set."""
    ids = instance_set.ids if isinstance(instance_set, InstanceSet) else list(instance_set)
    if len(ids) < 2:
        raise DomainError("need at least two instances")
    F = features.rows(ids)
    return float(pdist(F, metric="cityblock").mean())


def build_plan_sets(
    pool,
    features: FeatureSpace | None,
    plan: SelectionPlan,
    master_seed: int,
    *,
    component_entries=None,
    component_instances: tuple[int, ...] = (1, 5),
    dimension: int = 0,
) -> list[InstanceSet]:
    """All instance sets of a plan, with disjoint repetitions per size."""
    sets: list[InstanceSet] = []
    pool = list(pool)
    for strategy in plan.strategies:
        if strategy == "components":
            if component_entries is None:
                raise DataError("plan includes component sets but no component problems given")
            for ipf in component_instances:
                sets.append(select_components(component_entries, ipf, dimension=dimension))
            continue
        for size, reps in zip(plan.sizes, plan.repetitions):
            if size * reps > len(pool):
                raise CapacityError(
                    f"{strategy} s={size}: {reps} disjoint repetitions need "
                    f"{size * reps} problems, pool has {len(pool)}"
                )
            excluded: set[int] = set()
            for rep in range(reps):
                if strategy == "random":
                    seed = derive_seed(master_seed, "select", strategy, size, rep)
                    chosen = select_random(pool, size, excluded, seed, dimension=dimension)
                elif strategy == "greedy":
                    if features is None:
                        raise DataError("greedy selection requires a feature space")
                    chosen = select_greedy(pool, features, size, excluded, dimension=dimension)
                else:
                    raise DomainError(f"unknown strategy '{strategy}'")
                chosen = InstanceSet(chosen.ids, strategy, size, rep, frozenset(excluded), dimension)
                sets.append(chosen)
                excluded |= set(chosen.ids)
    return sets


def write_instance_set(path, instance_set: InstanceSet, config_hash: str = "") -> None:
    doc = {
        "config_hash": config_hash,
        "set_id": instance_set.set_id,
        "strategy": instance_set.strategy,
        "size": instance_set.size,
        "repetition": instance_set.repetition,
        "dimension": instance_set.dimension,
        "excluded_lineage_hash": f"{derive_seed(0, 'lineage', *sorted(instance_set.excluded)):016x}",
        "ids": list(instance_set.ids),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_instance_set(path, expected_hash: str | None = None) -> InstanceSet:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError as exc:
        raise DataError(f"missing instance set {path}") from exc
    if expected_hash is not None and doc.get("config_hash") != expected_hash:
        from .errors import StalenessError

        raise StalenessError(f"{path} written under config {doc.get('config_hash')!r}")
    return InstanceSet(
        tuple(doc["ids"]), doc["strategy"], doc["size"], doc["repetition"],
        frozenset(), doc.get("dimension", 0),
    )
