"""Algorithm-selection analysis on top of the performance table.

Labels instances by their best algorithm, trains tree-ensemble selectors
on normalized feature vectors, and quantifies selector quality as the
percentage of the VBS-SBS gap closed on an evaluation set.  All argmax
ties break toward the lowest algorithm id.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import DataError, DomainError
from .gbdt import GradientBoostedClassifier, RandomForestClassifier
from .portfolio import PerformanceTable
from .selection import InstanceSet


@dataclass
class LabeledDataset:
    """Per-instance normalized features, AOCC rows, and best-algorithm label."""

    problem_ids: list[int]
    algorithm_ids: list[int]  # the portfolio subset, ascending
    aocc: np.ndarray  # (n, len(algorithm_ids))
    labels: np.ndarray  # best algorithm id per instance
    features: np.ndarray | None = None  # (n, n_features), normalized
    feature_names: list[str] = field(default_factory=list)


def _best_algorithm(row: np.ndarray, algorithm_ids: list[int]) -> int:
    return int(algorithm_ids[int(np.argmax(row))])  # first max = lowest id


def label_instances(
    perf: PerformanceTable,
    subset=None,
    *,
    features: np.ndarray | None = None,
    problem_ids=None,
    feature_names=None,
) -> LabeledDataset:
    """Argmax labels over the portfolio subset, ties to the lowest id."""
    aids = sorted(subset if subset is not None else perf.algorithm_ids)
    if not aids:
        raise DomainError("empty portfolio subset")
    pids = list(problem_ids if problem_ids is not None else perf.problem_ids)
    A = perf.matrix(pids, aids)
    labels = np.array([_best_algorithm(A[i], aids) for i in range(len(pids))])
    return LabeledDataset(pids, aids, A, labels, features, list(feature_names or []))


def sbs(perf: PerformanceTable, instance_ids, subset=None) -> int:
    """The algorithm with the best mean AOCC on the set (tie: lowest id)."""
    aids = sorted(subset if subset is not None else perf.algorithm_ids)
    pids = list(instance_ids)
    if not pids or not aids:
        raise DomainError("empty instance set or subset")
    means = perf.matrix(pids, aids).mean(axis=0)
    return int(aids[int(np.argmax(means))])


def sbs_mean(perf: PerformanceTable, instance_ids, subset=None) -> float:
    aids = sorted(subset if subset is not None else perf.algorithm_ids)
    pids = list(instance_ids)
    means = perf.matrix(pids, aids).mean(axis=0)
    return float(means.max())


def vbs_mean(perf: PerformanceTable, instance_ids, subset=None) -> float:
    """Mean over instances of the per-instance best AOCC."""
    aids = sorted(subset if subset is not None else perf.algorithm_ids)
    pids = list(instance_ids)
    if not pids or not aids:
        raise DomainError("empty instance set or subset")
    return float(perf.matrix(pids, aids).max(axis=1).mean())


def portfolio_powerset_gaps(perf: PerformanceTable, min_size: int = 3, instance_ids=None) -> list[dict]:
    """VBS-SBS gap of every algorithm subset of size >= min_size."""
    aids = sorted(perf.algorithm_ids)
    if len(aids) > 12:
        raise DomainError(f"powerset enumeration guarded at 12 algorithms, got {len(aids)}")
    pids = list(instance_ids if instance_ids is not None else perf.problem_ids)
    A = perf.matrix(pids, aids)
    rows = []
    for size in range(min_size, len(aids) + 1):
        for subset in combinations(range(len(aids)), size):
            sub = A[:, list(subset)]
            means = sub.mean(axis=0)
            s_idx = int(np.argmax(means))
            gap = float(sub.max(axis=1).mean() - means[s_idx])
            rows.append(
                {
                    "subset": tuple(aids[j] for j in subset),
                    "size": size,
                    "sbs_id": int(aids[subset[s_idx]]),
                    "sbs_mean": float(means[s_idx]),
                    "vbs_mean": float(sub.max(axis=1).mean()),
                    "gap": gap,
                }
            )
    return rows


class OraclePredictor:
    """Per-instance argmax of the performance table; the VBS as a model."""

    kind = "oracle"

    def __init__(self, perf: PerformanceTable, subset=None):
        self.aids = sorted(subset if subset is not None else perf.algorithm_ids)
        self._best = {
            pid: _best_algorithm(perf.matrix([pid], self.aids)[0], self.aids)
            for pid in perf.problem_ids
        }

    def predict_ids(self, problem_ids) -> np.ndarray:
        return np.array([self._best[p] for p in problem_ids])


class ConstantPredictor:
    """Always predicts one fixed algorithm id."""

    kind = "constant"

    def __init__(self, algorithm_id: int):
        self.algorithm_id = int(algorithm_id)

    def predict(self, X) -> np.ndarray:
        return np.full(len(X), self.algorithm_id)


@dataclass
class SelectorModel:
    """A trained classifier plus its training provenance."""

    classifier: object
    algorithm_ids: list[int]
    feature_names: list[str]
    training_ids: list[int]
    metadata: dict = field(default_factory=dict)
    constant: bool = False

    def predict_ids(self, X: np.ndarray, problem_ids=None) -> np.ndarray:
        if isinstance(self.classifier, OraclePredictor):
            return self.classifier.predict_ids(problem_ids)
        return np.asarray(self.classifier.predict(X))

    def to_dict(self) -> dict:
        return {
            "model": self.classifier.to_dict(),
            "algorithm_ids": self.algorithm_ids,
            "feature_names": self.feature_names,
            "training_ids": self.training_ids,
            "metadata": self.metadata,
            "constant": self.constant,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SelectorModel":
        inner = doc["model"]
        if inner["kind"] == "gbdt":
            clf = GradientBoostedClassifier.from_dict(inner)
        elif inner["kind"] == "forest":
            clf = RandomForestClassifier.from_dict(inner)
        elif inner["kind"] == "constant":
            clf = ConstantPredictor(inner["algorithm_id"])
        else:
            raise DataError(f"unknown model kind {inner['kind']!r}")
        return cls(
            clf, list(doc["algorithm_ids"]), list(doc["feature_names"]),
            list(doc["training_ids"]), doc.get("metadata", {}), doc.get("constant", False),
        )

    def save(self, path, config_hash: str = "") -> None:
        doc = self.to_dict()
        doc["config_hash"] = config_hash
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path, expected_hash: str | None = None) -> "SelectorModel":
        try:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
        except FileNotFoundError as exc:
            raise DataError(f"missing model {path}") from exc
        if expected_hash is not None and doc.get("config_hash") != expected_hash:
            from .errors import StalenessError

            raise StalenessError(f"{path} written under config {doc.get('config_hash')!r}")
        return cls.from_dict(doc)


def train_selector(dataset: LabeledDataset, hp: dict | None = None, seed: int = 0) -> SelectorModel:
    """Fit the multi-class selector; single-label datasets yield a flagged
    constant model."""
    if dataset.features is None:
        raise DomainError("dataset carries no feature matrix")
    if dataset.features.shape[0] != len(dataset.problem_ids):
        raise DomainError("feature matrix does not match the instance list")
    hp = dict(hp or {})
    kind = hp.pop("kind", "gbdt")
    meta = {"seed": seed, "kind": kind, "hyperparameters": dict(hp)}
    distinct = sorted(set(int(v) for v in dataset.labels))
    if len(distinct) < 2:
        return SelectorModel(
            ConstantPredictor(distinct[0]), dataset.algorithm_ids,
            dataset.feature_names, list(dataset.problem_ids), meta, constant=True,
        )
    if kind == "gbdt":
        clf = GradientBoostedClassifier(**hp)
    elif kind == "forest":
        clf = RandomForestClassifier(**hp)
    else:
        raise DomainError(f"unknown selector kind {kind!r}")
    clf.fit(dataset.features, dataset.labels, seed=seed)
    return SelectorModel(
        clf, dataset.algorithm_ids, dataset.feature_names,
        list(dataset.problem_ids), meta,
    )


@dataclass
class GapReport:
    """SBS/VBS/selector means and the share of the gap the selector closed."""

    sbs_id: int
    sbs_mean_aocc: float
    vbs_mean_aocc: float
    selector_mean_aocc: float
    gap: float
    gap_closed_pct: float | None
    zero_gap: bool = False


def gap_closed(
    model: SelectorModel,
    perf: PerformanceTable,
    eval_ids,
    features: np.ndarray | None = None,
) -> GapReport:
    """Percentage of the eval set's VBS-SBS gap recovered by the model.

    SBS and VBS are computed on the evaluation set itself.  Zero-gap sets
    report a null percentage rather than 0 or infinity.
    """
    pids = list(eval_ids)
    aids = model.algorithm_ids
    A = perf.matrix(pids, aids)
    means = A.mean(axis=0)
    s_mean = float(means.max())
    s_id = int(aids[int(np.argmax(means))])
    v_mean = float(A.max(axis=1).mean())
    if isinstance(model.classifier, OraclePredictor):
        chosen = model.predict_ids(None, problem_ids=pids)
    else:
        if features is None:
            raise DataError("gap_closed needs feature vectors for the evaluation set")
        if len(features) != len(pids):
            raise DataError("feature matrix does not match the evaluation set")
        chosen = model.predict_ids(features)
    col = {a: j for j, a in enumerate(aids)}
    try:
        picks = [col[int(c)] for c in chosen]
    except KeyError as exc:
        raise DataError(f"model predicted unknown algorithm {exc.args[0]}") from exc
    sel_mean = float(A[np.arange(len(pids)), picks].mean())
    gap = v_mean - s_mean
    if gap <= 0.0:
        return GapReport(s_id, s_mean, v_mean, sel_mean, gap, None, zero_gap=True)
    pct = 100.0 * (sel_mean - s_mean) / gap
    return GapReport(s_id, s_mean, v_mean, sel_mean, gap, pct)


@dataclass
class CrossEvalCell:
    model_id: str
    eval_id: str
    report: GapReport
    diagonal: bool
    train_meta: dict
    eval_meta: dict


def cross_evaluate(
    models: dict[str, SelectorModel],
    eval_sets: dict[str, InstanceSet],
    perf: PerformanceTable,
    features_by_id: dict[int, np.ndarray],
    pool_ids,
) -> list[CrossEvalCell]:
    """Full model x (eval sets + unseen) gap-closed matrix.

    The "unseen" column evaluates each model on the pool minus its own
    training ids.  Cells where the evaluation set is the model's own
    training set are flagged diagonal and excluded from aggregates.
    """
    cells = []
    pool = list(pool_ids)

    def _features(ids):
        return np.vstack([features_by_id[i] for i in ids])

    for model_id, model in models.items():
        train_meta = dict(model.metadata)
        columns = [(eid, list(es.ids), {"strategy": es.strategy, "size": es.size, "repetition": es.repetition})
                   for eid, es in eval_sets.items()]
        unseen = [p for p in pool if p not in set(model.training_ids)]
        columns.append(("unseen", unseen, {"strategy": "unseen", "size": len(unseen), "repetition": 0}))
        for eval_id, ids, eval_meta in columns:
            report = gap_closed(model, perf, ids, _features(ids))
            diagonal = sorted(ids) == sorted(model.training_ids)
            cells.append(CrossEvalCell(model_id, eval_id, report, diagonal, train_meta, eval_meta))
    return cells


def aggregate_by_strategy_size(cells: list[CrossEvalCell]) -> list[dict]:
    """Mean gap-closed percentage per (train strategy+size, eval strategy+size).

    Diagonal cells (identical train/eval sets) and null percentages are
    excluded from the means.
    """
    groups: dict[tuple, list[float]] = {}
    for cell in cells:
        if cell.diagonal or cell.report.gap_closed_pct is None:
            continue
        key = (
            cell.train_meta.get("strategy"), cell.train_meta.get("size"),
            cell.eval_meta.get("strategy"), cell.eval_meta.get("size") if cell.eval_meta.get("strategy") != "unseen" else 0,
        )
        groups.setdefault(key, []).append(cell.report.gap_closed_pct)
    return [
        {
            "train_strategy": k[0], "train_size": k[1],
            "eval_strategy": k[2], "eval_size": k[3],
            "mean_gap_closed_pct": float(np.mean(v)), "n_cells": len(v),
        }
        for k, v in sorted(groups.items(), key=lambda kv: tuple(str(x) for x in kv[0]))
    ]


def pca_project(reference: np.ndarray, vectors: np.ndarray, components: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """Project onto the top principal axes of the reference population.

    Axes are fitted on the centered reference rows; each axis is oriented
    so its largest-magnitude loading is positive.  Axes beyond the
    reference rank are zeroed, so degenerate references yield exact-zero
    coordinates.  Returns (coordinates, axes).
    """
    reference = np.asarray(reference, dtype=float)
    vectors = np.asarray(vectors, dtype=float)
    if reference.ndim != 2 or reference.shape[0] < 3:
        raise DomainError("reference population needs at least 3 rows")
    center = reference.mean(axis=0)
    Xc = reference - center
    _, svals, Vt = np.linalg.svd(Xc, full_matrices=False)
    axes = np.zeros((components, reference.shape[1]))
    tol = max(svals[0], 0.0) * 1e-9 if len(svals) else 0.0
    rank = int(np.sum(svals > tol))
    take = min(components, rank, len(svals))
    axes[:take] = Vt[:take]
    for j in range(take):
        lead = int(np.argmax(np.abs(axes[j])))
        if axes[j, lead] < 0:
            axes[j] = -axes[j]
    return (vectors - center) @ axes.T, axes
