"""Exploratory landscape features from a single (points, values) sample.

Six groups are computed: model-fit statistics (meta), value-distribution
statistics (distr), level-set classification (level), nearest-better
statistics (nbc), dispersion ratios (disp), and information content (ic).
A feature that is undefined for a sample (zero variance, singular fit,
empty class) is flagged infeasible, never encoded as a sentinel value.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks
from scipy.spatial.distance import pdist, squareform
from scipy.stats import gaussian_kde, kurtosis, skew

from .errors import DomainError, PruningError, SampleSizeError

CATALOG_VERSION = "ela-catalog/1 (no pca, no limo groups)"

LEVEL_QUANTILES = (0.10, 0.25, 0.50)
DISP_FRACTIONS = (0.02, 0.05, 0.10, 0.25)
MIN_SAMPLE_FACTOR = 50
_IC_SETTLE = 0.05
_IC_GRID = 100


def _qtag(q: float) -> str:
    return f"{int(round(q * 100)):02d}"


def _build_catalog() -> dict[str, tuple[str, ...]]:
    meta = (
        "ela_meta.lin_simple.adj_r2",
        "ela_meta.lin_simple.intercept",
        "ela_meta.lin_simple.coef.min",
        "ela_meta.lin_simple.coef.max",
        "ela_meta.lin_simple.coef.max_by_min",
        "ela_meta.lin_w_interact.adj_r2",
        "ela_meta.quad_simple.adj_r2",
        "ela_meta.quad_simple.cond",
        "ela_meta.quad_w_interact.adj_r2",
    )
    distr = ("ela_distr.skewness", "ela_distr.kurtosis", "ela_distr.number_of_peaks")
    level = tuple(
        f"ela_level.{stat}_{_qtag(q)}"
        for q in LEVEL_QUANTILES
        for stat in ("mmce_lda", "mmce_qda", "qda_lda_ratio")
    )
    nbc = (
        "nbc.nb_nn_sd_ratio",
        "nbc.nb_nn_mean_ratio",
        "nbc.nb_fitness_cor",
        "nbc.nb_coeff_var",
        "nbc.fitness_indegree_cor",
    )
    disp = tuple(
        f"disp.{stat}_{_qtag(f)}"
        for stat in ("ratio_mean", "ratio_median", "diff_mean", "diff_median")
        for f in DISP_FRACTIONS
    )
    ic = ("ic.h_max", "ic.eps_s", "ic.eps_max", "ic.eps_ratio", "ic.m0")
    return {
        "ela_meta": meta,
        "ela_distr": distr,
        "ela_level": level,
        "nbc": nbc,
        "disp": disp,
        "ic": ic,
    }


@dataclass(frozen=True)
class FeatureCatalog:
    groups: dict[str, tuple[str, ...]] = field(default_factory=_build_catalog)
    version: str = CATALOG_VERSION

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for g in self.groups.values() for n in g)


DEFAULT_CATALOG = FeatureCatalog()


@dataclass
class FeatureVector:
    """Named feature values with per-feature feasibility flags."""

    problem_id: int | None
    values: dict[str, float]
    feasible: dict[str, bool]
    normalized: bool = False

    def as_array(self, names, infeasible_fill: float = np.nan) -> np.ndarray:
        return np.array(
            [self.values[n] if self.feasible[n] else infeasible_fill for n in names]
        )


def _finalize(raw: dict[str, float | None], catalog: FeatureCatalog, problem_id) -> FeatureVector:
    values, feasible = {}, {}
    for name in catalog.names:
        v = raw.get(name)
        ok = v is not None and math.isfinite(v)
        values[name] = float(v) if ok else float("nan")
        feasible[name] = ok
    return FeatureVector(problem_id, values, feasible, normalized=False)


def _adjusted_r2(y: np.ndarray, X: np.ndarray) -> tuple[float, np.ndarray]:
    n, p = X.shape
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    ss_res = float(resid @ resid)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0 or n - p - 1 <= 0:
        return float("nan"), beta
    r2 = 1.0 - ss_res / ss_tot
    return 1.0 - (1.0 - r2) * (n - 1) / (n - p - 1), beta


def _meta_features(points: np.ndarray, values: np.ndarray) -> dict[str, float]:
    n, d = points.shape
    ones = np.ones((n, 1))
    inter_cols = [
        (points[:, i] * points[:, j])[:, None] for i in range(d) for j in range(i + 1, d)
    ]
    lin = np.hstack([ones, points])
    lin_int = np.hstack([lin] + inter_cols) if inter_cols else lin
    quad = np.hstack([ones, points, points ** 2])
    quad_int = np.hstack([quad] + inter_cols) if inter_cols else quad

    out: dict[str, float] = {}
    adj, beta = _adjusted_r2(values, lin)
    out["ela_meta.lin_simple.adj_r2"] = adj
    out["ela_meta.lin_simple.intercept"] = float(beta[0])
    coefs = np.abs(beta[1:])
    cmin, cmax = float(coefs.min()), float(coefs.max())
    out["ela_meta.lin_simple.coef.min"] = cmin
    out["ela_meta.lin_simple.coef.max"] = cmax
    out["ela_meta.lin_simple.coef.max_by_min"] = cmax / cmin if cmin > 0 else float("nan")
    out["ela_meta.lin_w_interact.adj_r2"] = _adjusted_r2(values, lin_int)[0]
    adj_q, beta_q = _adjusted_r2(values, quad)
    out["ela_meta.quad_simple.adj_r2"] = adj_q
    qcoefs = np.abs(beta_q[1 + d:])
    qmin = float(qcoefs.min())
    out["ela_meta.quad_simple.cond"] = float(qcoefs.max()) / qmin if qmin > 0 else float("nan")
    out["ela_meta.quad_w_interact.adj_r2"] = _adjusted_r2(values, quad_int)[0]
    return out


def _distr_features(values: np.ndarray) -> dict[str, float]:
    out: dict[str, float] = {}
    if np.std(values) == 0.0:
        return {
            "ela_distr.skewness": float("nan"),
            "ela_distr.kurtosis": float("nan"),
            "ela_distr.number_of_peaks": float("nan"),
        }
    out["ela_distr.skewness"] = float(skew(values, bias=True))
    out["ela_distr.kurtosis"] = float(kurtosis(values, bias=True))
    v = (values - values.mean()) / values.std()
    try:
        kde = gaussian_kde(v, bw_method="silverman")
        pad = 3.0 * kde.factor
        grid = np.linspace(v.min() - pad, v.max() + pad, 512)
        dens = kde(grid)
        peaks, _ = find_peaks(dens, prominence=0.001 * float(dens.max()))
        out["ela_distr.number_of_peaks"] = float(max(len(peaks), 1))
    except np.linalg.LinAlgError:
        out["ela_distr.number_of_peaks"] = float("nan")
    return out


def _level_features(points: np.ndarray, values: np.ndarray, seed: int) -> dict[str, float]:
    from sklearn.discriminant_analysis import (
        LinearDiscriminantAnalysis,
        QuadraticDiscriminantAnalysis,
    )
    from sklearn.model_selection import StratifiedKFold

    # canonical row order, so folds do not depend on how the sample was stored
    order = np.lexsort(tuple(points[:, j] for j in reversed(range(points.shape[1]))) + (values,))
    points = points[order]
    values = values[order]
    out: dict[str, float] = {}
    for q in LEVEL_QUANTILES:
        tag = _qtag(q)
        thresh = np.quantile(values, q)
        labels = (values <= thresh).astype(int)
        names = {
            "lda": f"ela_level.mmce_lda_{tag}",
            "qda": f"ela_level.mmce_qda_{tag}",
            "ratio": f"ela_level.qda_lda_ratio_{tag}",
        }
        counts = np.bincount(labels, minlength=2)
        if counts.min() < 5:
            for key in names.values():
                out[key] = float("nan")
            continue
        skf = StratifiedKFold(n_splits=5, shuffle=True, random_state=seed)
        mmce = {"lda": [], "qda": []}
        failed = False
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            for train, test in skf.split(points, labels):
                for key, cls in (("lda", LinearDiscriminantAnalysis), ("qda", QuadraticDiscriminantAnalysis)):
                    try:
                        model = cls().fit(points[train], labels[train])
                        pred = model.predict(points[test])
                    except Exception:
                        failed = True
                        break
                    mmce[key].append(float(np.mean(pred != labels[test])))
                if failed:
                    break
        if failed:
            for key in names.values():
                out[key] = float("nan")
            continue
        lda_mmce = float(np.mean(mmce["lda"]))
        qda_mmce = float(np.mean(mmce["qda"]))
        out[names["lda"]] = lda_mmce
        out[names["qda"]] = qda_mmce
        out[names["ratio"]] = qda_mmce / lda_mmce if lda_mmce > 0 else float("nan")
    return out


def _nbc_features(D: np.ndarray, values: np.ndarray) -> dict[str, float]:
    n = len(values)
    keys = (
        "nbc.nb_nn_sd_ratio",
        "nbc.nb_nn_mean_ratio",
        "nbc.nb_fitness_cor",
        "nbc.nb_coeff_var",
        "nbc.fitness_indegree_cor",
    )
    if np.std(values) == 0.0:
        return {k: float("nan") for k in keys}
    Dinf = D.copy()
    np.fill_diagonal(Dinf, np.inf)
    nn = Dinf.min(axis=1)
    order = np.argsort(values, kind="stable")
    nb = np.full(n, np.nan)
    nb_target = np.full(n, -1)
    i0 = 0
    while i0 < n:
        i1 = i0
        v0 = values[order[i0]]
        while i1 < n and values[order[i1]] == v0:
            i1 += 1
        prefix = order[:i0]
        if len(prefix):
            for p in range(i0, i1):
                i = order[p]
                row = D[i, prefix]
                j = int(np.argmin(row))
                nb[i] = row[j]
                nb_target[i] = prefix[j]
        i0 = i1
    valid = np.isfinite(nb)
    if valid.sum() < 2:
        return {k: float("nan") for k in keys}
    nbv = nb[valid]
    indegree = np.bincount(nb_target[valid], minlength=n).astype(float)

    def _cor(a, b):
        if np.std(a) == 0.0 or np.std(b) == 0.0:
            return float("nan")
        return float(np.corrcoef(a, b)[0, 1])

    sd_nn, mean_nn = float(np.std(nn)), float(np.mean(nn))
    return {
        "nbc.nb_nn_sd_ratio": float(np.std(nbv)) / sd_nn if sd_nn > 0 else float("nan"),
        "nbc.nb_nn_mean_ratio": float(np.mean(nbv)) / mean_nn if mean_nn > 0 else float("nan"),
        "nbc.nb_fitness_cor": _cor(nbv, values[valid]),
        "nbc.nb_coeff_var": float(np.std(nbv)) / float(np.mean(nbv)) if np.mean(nbv) > 0 else float("nan"),
        "nbc.fitness_indegree_cor": _cor(values, indegree),
    }


def dispersion_stats(points: np.ndarray, values: np.ndarray, fraction: float, cond: np.ndarray | None = None) -> dict[str, float]:
    """Mean/median dispersion of the best `fraction` points vs all points."""
    n = len(values)
    cond = pdist(points) if cond is None else cond
    mean_all, med_all = float(cond.mean()), float(np.median(cond))
    m = max(2, int(np.ceil(fraction * n)))
    idx = np.argsort(values, kind="stable")[:m]
    sub = pdist(points[idx]) if m < n else cond
    mean_b, med_b = float(sub.mean()), float(np.median(sub))
    return {
        "ratio_mean": mean_b / mean_all if mean_all > 0 else float("nan"),
        "ratio_median": med_b / med_all if med_all > 0 else float("nan"),
        "diff_mean": mean_b - mean_all,
        "diff_median": med_b - med_all,
    }


def _disp_features(points: np.ndarray, values: np.ndarray, cond: np.ndarray) -> dict[str, float]:
    out: dict[str, float] = {}
    for f in DISP_FRACTIONS:
        stats = dispersion_stats(points, values, f, cond=cond)
        for stat, v in stats.items():
            out[f"disp.{stat}_{_qtag(f)}"] = v
    return out


def _nn_tour(D: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Greedy nearest-neighbor tour of the sample.

    Starts at the lexicographically smallest point, so the tour is a set
    property of the sample rather than of its storage order.
    """
    n = D.shape[0]
    start = int(np.lexsort(tuple(points[:, j] for j in reversed(range(points.shape[1]))))[0])
    visited = np.zeros(n, dtype=bool)
    tour = np.empty(n, dtype=int)
    visited[start] = True
    tour[0] = start
    row = D[start].copy()
    for step in range(1, n):
        row[visited] = np.inf
        cur = int(np.argmin(row))
        visited[cur] = True
        tour[step] = cur
        row = D[cur].copy()
    return tour


def _ic_features(D: np.ndarray, points: np.ndarray, values: np.ndarray) -> dict[str, float]:
    out = {k: float("nan") for k in ("ic.h_max", "ic.eps_s", "ic.eps_max", "ic.eps_ratio", "ic.m0")}
    n = len(values)
    tour = _nn_tour(D, points)
    steps = D[tour[:-1], tour[1:]]
    dy = np.diff(values[tour])
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = np.where(steps > 0, dy / steps, 0.0)
    # partial information content at eps = 0: alternations of the
    # zero-stripped sign sequence
    s0 = np.sign(phi).astype(int)
    nz = s0[s0 != 0]
    if len(nz) == 0:
        out["ic.m0"] = 0.0
        out["ic.h_max"] = 0.0
        return out
    changes = 1 + int(np.sum(nz[1:] != nz[:-1]))
    out["ic.m0"] = changes / (n - 1)

    mags = np.abs(phi[phi != 0])
    lo, hi = float(mags.min()), float(mags.max())
    if hi <= 0:
        return out
    if lo == hi:
        grid = np.array([0.0, lo])
    else:
        grid = np.concatenate([[0.0], np.logspace(np.log10(lo), np.log10(hi), _IC_GRID)])
    S = (phi[None, :] > grid[:, None]).astype(np.int8) - (phi[None, :] < -grid[:, None]).astype(np.int8)
    a, b = S[:, :-1], S[:, 1:]
    codes = (a + 1) * 3 + (b + 1)  # 0..8; diagonal codes 0, 4, 8 are a == b
    n_pairs = codes.shape[1]
    offsets = (np.arange(len(grid)) * 9)[:, None]
    counts = np.bincount((codes + offsets).ravel(), minlength=9 * len(grid)).reshape(len(grid), 9)
    probs = counts / n_pairs
    off_diag = [1, 2, 3, 5, 6, 7]
    p = probs[:, off_diag]
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log2(p), 0.0)
    H = -terms.sum(axis=1)
    h_max = float(H.max())
    out["ic.h_max"] = h_max
    imax = int(np.argmax(H[1:])) + 1  # restrict to positive eps
    out["ic.eps_max"] = float(np.log10(grid[imax]))
    settle = np.where(H < _IC_SETTLE)[0]
    settle = settle[grid[settle] > 0]
    if len(settle):
        out["ic.eps_s"] = float(np.log10(grid[settle[0]]))
    if h_max > 0:
        half = np.where(H < 0.5 * h_max)[0]
        half = half[grid[half] > 0]
        if len(half):
            out["ic.eps_ratio"] = float(np.log10(grid[half[0]]))
    return out


def compute_features(
    points: np.ndarray,
    values: np.ndarray,
    *,
    problem_id: int | None = None,
    catalog: FeatureCatalog = DEFAULT_CATALOG,
    seed: int = 0,
) -> FeatureVector:
    """All catalog features from one sample of (points, values)."""
    points = np.asarray(points, dtype=float)
    values = np.asarray(values, dtype=float)
    if points.ndim != 2 or len(points) != len(values):
        raise DomainError("points must be (n, d) with matching values")
    n, d = points.shape
    if n < MIN_SAMPLE_FACTOR * d:
        raise SampleSizeError(f"need at least {MIN_SAMPLE_FACTOR * d} points for d={d}, got {n}")
    if not np.all(np.isfinite(points)) or not np.all(np.isfinite(values)):
        raise DomainError("points and values must be finite")

    cond = pdist(points)
    D = squareform(cond)
    raw: dict[str, float] = {}
    raw.update(_meta_features(points, values))
    raw.update(_distr_features(values))
    raw.update(_level_features(points, values, seed))
    raw.update(_nbc_features(D, values))
    raw.update(_disp_features(points, values, cond))
    raw.update(_ic_features(D, points, values))
    return _finalize(raw, catalog, problem_id)


def average_feature_repetitions(vectors: list[FeatureVector]) -> FeatureVector:
    """Per-feature mean over repetitions; any infeasible repetition wins."""
    if not vectors:
        raise DomainError("need at least one repetition")
    names = list(vectors[0].values)
    for v in vectors[1:]:
        if list(v.values) != names or v.problem_id != vectors[0].problem_id:
            raise DomainError("mismatched catalogs or problem ids")
    values, feasible = {}, {}
    for name in names:
        if all(v.feasible[name] for v in vectors):
            values[name] = float(np.mean([v.values[name] for v in vectors]))
            feasible[name] = True
        else:
            values[name] = float("nan")
            feasible[name] = False
    return FeatureVector(vectors[0].problem_id, values, feasible, normalized=vectors[0].normalized)


def feature_matrix(vectors: list[FeatureVector], names) -> np.ndarray:
    """Population matrix with NaN marking infeasible cells."""
    return np.vstack([v.as_array(names) for v in vectors])


def prune_features(matrix: np.ndarray, names, threshold: float = 0.9) -> list[str]:
    """Drop infeasible features, then iteratively the most-correlated ones.

    Step 1 removes every feature with a non-finite value for any member.
    Step 2 repeatedly removes the feature with the largest number of
    partners at |Pearson r| > threshold (ties: the one latest in catalog
    order), recounting each round, until no pair exceeds the threshold.
    Output preserves catalog order.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] < 3:
        raise DomainError("need a population of at least 3 rows")
    if matrix.shape[1] != len(names):
        raise DomainError("matrix/names mismatch")
    keep = [j for j in range(len(names)) if np.all(np.isfinite(matrix[:, j]))]
    if not keep:
        raise PruningError("no feature is feasible across the whole population")
    cols = matrix[:, keep]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        corr = np.corrcoef(cols, rowvar=False)
    corr = np.atleast_2d(np.nan_to_num(corr, nan=0.0))
    np.fill_diagonal(corr, 0.0)
    adj = np.abs(corr) > threshold
    alive = list(range(len(keep)))
    while True:
        counts = adj[np.ix_(alive, alive)].sum(axis=1)
        if not len(counts) or counts.max() == 0:
            break
        victim = int(np.where(counts == counts.max())[0][-1])
        alive.pop(victim)
    if not alive:
        raise PruningError("pruning removed every feature")
    return [names[keep[j]] for j in alive]


@dataclass
class NormalizationBounds:
    """Per-feature (min, max) over a reference population."""

    bounds: dict[str, tuple[float, float]]
    dimension: int = 0
    population: str = ""


def fit_minmax(matrix: np.ndarray, names, *, dimension: int = 0, population: str = "") -> NormalizationBounds:
    matrix = np.asarray(matrix, dtype=float)
    bounds = {}
    for j, name in enumerate(names):
        col = matrix[:, j]
        col = col[np.isfinite(col)]
        if len(col) == 0:
            bounds[name] = (float("nan"), float("nan"))
        else:
            bounds[name] = (float(col.min()), float(col.max()))
    return NormalizationBounds(bounds, dimension, population)


def apply_minmax(vec: FeatureVector, bounds: NormalizationBounds) -> FeatureVector:
    """(v - min) / (max - min), clipped to [0,1]; constant features map to 0.5."""
    values, feasible = {}, {}
    for name, v in vec.values.items():
        lo, hi = bounds.bounds.get(name, (float("nan"), float("nan")))
        if not vec.feasible[name] or not (math.isfinite(lo) and math.isfinite(hi)):
            values[name] = float("nan")
            feasible[name] = False
            continue
        if lo == hi:
            values[name] = 0.5
        else:
            values[name] = float(np.clip((v - lo) / (hi - lo), 0.0, 1.0))
        feasible[name] = True
    return FeatureVector(vec.problem_id, values, feasible, normalized=True)
