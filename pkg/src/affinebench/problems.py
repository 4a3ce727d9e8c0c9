"""Affine combinations of component functions with a known optimum.

A problem is built from k component instances (seeded shift + rotation of
a registry function), each rescaled so that its log-precision range maps
to [-8, 2], then combined by a weighted sum in log-precision space.  The
construction guarantees F(x*) = 0 exactly and F >= 0 everywhere.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DataError, DegenerateComponentError, DomainError
from .functions import get_component, registry_size
from .sampling import SampleDesign, derive_seed, sobol_points

LOWER_BOUND = -5.0
UPPER_BOUND = 5.0
SHIFT_BOUND = 4.0

PRECISION_FLOOR = 1e-8
LOG_FLOOR = -8.0
LOG_TARGET = 2.0
_VALUE_EPS = 1e-12
# computed through the same power call as evaluation, so F(x*) == 0 exactly
_F_OFFSET = float(np.power(10.0, LOG_FLOOR))

SCALE_SAMPLE_FACTOR = 500


@dataclass(frozen=True)
class ComponentInstance:
    """A seeded transformation of one registry function.

    The shift doubles as the instance's own optimum location; the rotation
    is applied around whatever optimum the containing problem assigns.
    """

    component_id: int
    instance_id: int
    dimension: int
    shift: np.ndarray
    rotation: np.ndarray
    scale_factor: float


@dataclass(frozen=True)
class ProblemInstance:
    """An evaluable affine combination with optimum value 0 at x_star."""

    problem_id: int
    dimension: int
    active: tuple[tuple[int, int], ...]  # (component_id, instance_id)
    weights: np.ndarray
    x_star: np.ndarray
    components: tuple[ComponentInstance, ...]
    metadata: dict = field(default_factory=dict)

    @property
    def kind(self) -> str:
        return self.metadata.get("kind", "generated")


@dataclass(frozen=True)
class GeneratorSpec:
    """How many problems to generate per active-component count."""

    dimension: int
    counts_per_k: dict[int, int]
    instance_pool_size: int = 100
    master_seed: int = 0

    def __post_init__(self):
        for k, count in self.counts_per_k.items():
            if count < 0:
                raise DomainError(f"negative count for k={k}")
            if not 1 <= k <= registry_size():
                raise DomainError(f"k={k} outside registry bounds 1..{registry_size()}")


class ScaleFactorCache:
    """Concurrent-read, serialized-write cache of rescaling factors.

    Keyed "component_id.instance_id.dimension" as in the JSON manifest.
    """

    def __init__(self, values: dict[str, float] | None = None):
        self._values = dict(values or {})
        self._lock = threading.Lock()

    @staticmethod
    def key(component_id: int, instance_id: int, d: int) -> str:
        return f"{component_id}.{instance_id}.{d}"

    def get(self, component_id: int, instance_id: int, d: int) -> float | None:
        return self._values.get(self.key(component_id, instance_id, d))

    def put(self, component_id: int, instance_id: int, d: int, value: float) -> None:
        with self._lock:
            self._values[self.key(component_id, instance_id, d)] = value

    def as_dict(self) -> dict[str, float]:
        return dict(self._values)

    def save(self, path, config_hash: str = "") -> None:
        doc = {"config_hash": config_hash, "scale_factors": self.as_dict()}
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> tuple["ScaleFactorCache", str]:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        return cls(doc.get("scale_factors", {})), doc.get("config_hash", "")


def component_precision(ci: ComponentInstance, x_star: np.ndarray, x: np.ndarray) -> np.ndarray | float:
    """Raw-function precision of `x` with the optimum relocated to `x_star`.

    Returns f(R (x - x*)) - raw_optimum_value, clamped at 0 to absorb
    floating-point negatives.  Accepts one point or a batch.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = x[None, :] if single else x
    if X.shape[1] != ci.dimension:
        raise DomainError(f"point dimension {X.shape[1]} != instance dimension {ci.dimension}")
    f = get_component(ci.component_id)
    diff = X - np.asarray(x_star, dtype=float)
    p = f.eval(np.einsum("md,rd->mr", diff, ci.rotation)) - f.raw_optimum_value
    np.maximum(p, 0.0, out=p)
    return float(p[0]) if single else p


def estimate_scale_factor(ci: ComponentInstance, sample_size: int | None = None) -> float:
    """log10 of the maximal precision over a Sobol sample of the domain.

    The sample uses a fixed, unscrambled design, so the estimate depends
    only on (component_id, instance_id, dimension).
    """
    if sample_size is None:
        sample_size = SCALE_SAMPLE_FACTOR * ci.dimension
    if sample_size < 2:
        raise DomainError("scale estimation needs sample_size >= 2")
    design = SampleDesign(n=sample_size, d=ci.dimension, lo=LOWER_BOUND, hi=UPPER_BOUND)
    pts = sobol_points(design)
    max_prec = float(np.max(component_precision(ci, ci.shift, pts)))
    if max_prec < PRECISION_FLOOR:
        raise DegenerateComponentError(
            f"component {ci.component_id} instance {ci.instance_id} (d={ci.dimension}) "
            f"shows no precision above {PRECISION_FLOOR}"
        )
    return max(float(np.log10(max_prec)), LOG_FLOOR + 1e-6)


def instantiate_component(
    component_id: int,
    instance_id: int,
    d: int,
    master_seed: int,
    *,
    instance_pool_size: int = 100,
    cache: ScaleFactorCache | None = None,
) -> ComponentInstance:
    """Build the deterministic instance for (component, instance, d, seed).

    Shift uniform in [-4,4]^d; rotation from the QR decomposition of a
    Gaussian matrix with column signs fixed by the R diagonal, so the
    result does not depend on the QR implementation's sign convention.
    """
    get_component(component_id)  # registry check
    if not 1 <= instance_id <= instance_pool_size:
        raise DomainError(f"instance_id {instance_id} outside [1, {instance_pool_size}]")
    if d < 1:
        raise DomainError("dimension must be >= 1")
    rng = np.random.default_rng(derive_seed(master_seed, "instance", component_id, instance_id, d))
    shift = rng.uniform(-SHIFT_BOUND, SHIFT_BOUND, size=d)
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    rotation = q * signs
    ci = ComponentInstance(component_id, instance_id, d, shift, rotation, float("nan"))
    cached = cache.get(component_id, instance_id, d) if cache is not None else None
    if cached is None:
        s = estimate_scale_factor(ci)
        if cache is not None:
            cache.put(component_id, instance_id, d, s)
    else:
        s = cached
    return replace(ci, scale_factor=s)


def evaluate_problem(pi: ProblemInstance, x: np.ndarray) -> np.ndarray | float:
    """Evaluate the affine combination at one point or a batch of points.

    Evaluation outside [-5,5]^d is permitted; no clipping takes place.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = x[None, :] if single else x
    if X.shape[1] != pi.dimension:
        raise DomainError(f"point dimension {X.shape[1]} != problem dimension {pi.dimension}")
    diff = X - pi.x_star
    acc = np.zeros(len(X))
    with np.errstate(over="ignore"):
        for ci, w in zip(pi.components, pi.weights):
            f = get_component(ci.component_id)
            p = f.eval(np.einsum("md,rd->mr", diff, ci.rotation)) - f.raw_optimum_value
            np.maximum(p, 0.0, out=p)
            lg = np.log10(p + _VALUE_EPS)
            np.maximum(lg, LOG_FLOOR, out=lg)
            # scaled log-precision, shifted so the optimum contributes exactly 0
            acc += (w * (LOG_TARGET - LOG_FLOOR) / (ci.scale_factor - LOG_FLOOR)) * (lg - LOG_FLOOR)
        vals = np.power(10.0, acc + LOG_FLOOR) - _F_OFFSET
    np.maximum(vals, 0.0, out=vals)
    return float(vals[0]) if single else vals


def generate_problem(
    d: int,
    k: int,
    master_seed: int,
    problem_id: int,
    *,
    instance_pool_size: int = 100,
    cache: ScaleFactorCache | None = None,
    _instances: dict | None = None,
) -> ProblemInstance:
    """Draw one affine combination with k active components."""
    if not 1 <= k <= registry_size():
        raise DomainError(f"k={k} outside registry bounds 1..{registry_size()}")
    rng = np.random.default_rng(derive_seed(master_seed, "problem", d, problem_id))
    cids = np.sort(rng.choice(np.arange(1, registry_size() + 1), size=k, replace=False))
    iids = rng.integers(1, instance_pool_size + 1, size=k)
    w = rng.uniform(0.0, 1.0, size=k)
    while np.any(w <= 0.0):
        w = rng.uniform(0.0, 1.0, size=k)
    w = w / w.sum()
    x_star = rng.uniform(LOWER_BOUND, UPPER_BOUND, size=d)
    comps = []
    for cid, iid in zip(cids, iids):
        key = (int(cid), int(iid))
        if _instances is not None and key in _instances:
            comps.append(_instances[key])
            continue
        ci = instantiate_component(
            int(cid), int(iid), d, master_seed,
            instance_pool_size=instance_pool_size, cache=cache,
        )
        if _instances is not None:
            _instances[key] = ci
        comps.append(ci)
    return ProblemInstance(
        problem_id=problem_id,
        dimension=d,
        active=tuple((int(c), int(i)) for c, i in zip(cids, iids)),
        weights=w,
        x_star=x_star,
        components=tuple(comps),
        metadata={"kind": "generated", "master_seed": master_seed, "k": k},
    )


def generate_suite(
    spec: GeneratorSpec,
    *,
    cache: ScaleFactorCache | None = None,
    start_problem_id: int = 1,
) -> list[ProblemInstance]:
    """Generate `counts_per_k[k]` problems per k, with dense stable ids."""
    problems = []
    pid = start_problem_id
    shared_instances: dict = {}
    for k in sorted(spec.counts_per_k):
        for _ in range(spec.counts_per_k[k]):
            problems.append(
                generate_problem(
                    spec.dimension, k, spec.master_seed, pid,
                    instance_pool_size=spec.instance_pool_size,
                    cache=cache, _instances=shared_instances,
                )
            )
            pid += 1
    return problems


def component_problems(
    d: int,
    instances_per_function: int,
    master_seed: int,
    *,
    cache: ScaleFactorCache | None = None,
    start_problem_id: int = 1,
) -> list[ProblemInstance]:
    """Single-component wrapper problems for every registry entry.

    The wrapper keeps the instance's own optimum (its shift), weight 1,
    and the same rescaling as inside combinations; these rescaled
    components serve as reference population and as a training strategy.
    """
    problems = []
    pid = start_problem_id
    for cid in range(1, registry_size() + 1):
        for iid in range(1, instances_per_function + 1):
            ci = instantiate_component(cid, iid, d, master_seed, cache=cache)
            problems.append(
                ProblemInstance(
                    problem_id=pid,
                    dimension=d,
                    active=((cid, iid),),
                    weights=np.ones(1),
                    x_star=ci.shift.copy(),
                    components=(ci,),
                    metadata={
                        "kind": "component",
                        "master_seed": master_seed,
                        "component_id": cid,
                        "instance_id": iid,
                    },
                )
            )
            pid += 1
    return problems


def problem_record(pi: ProblemInstance) -> dict:
    """JSON-ready manifest entry for one problem."""
    return {
        "problem_id": pi.problem_id,
        "kind": pi.kind,
        "dimension": pi.dimension,
        "active": [[c, i] for c, i in pi.active],
        "weights": [float(w) for w in pi.weights],
        "optimum": [float(v) for v in pi.x_star],
        "seed_lineage": {
            "master_seed": pi.metadata.get("master_seed"),
            "derivation": "blake2b(master_seed, purpose, component, instance, d, problem)",
        },
    }


def suite_manifest(problems: list[ProblemInstance], d: int, master_seed: int, config_hash: str = "") -> dict:
    return {
        "config_hash": config_hash,
        "dimension": d,
        "master_seed": master_seed,
        "n_problems": len(problems),
        "problems": [problem_record(p) for p in problems],
    }


def write_manifest(path, manifest: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_manifest(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise DataError(f"missing manifest {path}") from exc


def rebuild_problem(record: dict, master_seed: int, cache: ScaleFactorCache | None = None) -> ProblemInstance:
    """Reconstruct an evaluable problem from its manifest entry."""
    d = record["dimension"]
    comps = tuple(
        instantiate_component(cid, iid, d, master_seed, cache=cache)
        for cid, iid in record["active"]
    )
    return ProblemInstance(
        problem_id=record["problem_id"],
        dimension=d,
        active=tuple((c, i) for c, i in record["active"]),
        weights=np.asarray(record["weights"], dtype=float),
        x_star=np.asarray(record["optimum"], dtype=float),
        components=comps,
        metadata={"kind": record.get("kind", "generated"), "master_seed": master_seed},
    )
