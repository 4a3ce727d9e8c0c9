"""Command-line front end tying the pipeline together.

Verbs: generate, features, run, select, train, evaluate, report.  Each
verb reads the experiment configuration (a YAML file, or the built-in
desk-scale preset), stamps every artifact with the configuration hash,
and refuses inputs written under a different hash.
"""

from __future__ import annotations

import argparse
import os
import sys

# cap BLAS threads before numpy loads: workers are process-parallel
os.environ.setdefault("OMP_NUM_THREADS", "1")
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("MKL_NUM_THREADS", "1")

import numpy as np

from . import aas, plots
from .config import ExperimentConfig, desk_scale_config, load_config, write_config
from .ela import (
    DEFAULT_CATALOG,
    FeatureVector,
    average_feature_repetitions,
    compute_features,
    feature_matrix,
    fit_minmax,
    prune_features,
)
from .errors import AffineBenchError, ConfigError, DataError
from .fileio import read_csv, read_json, write_csv, write_json
from .optimizers import OptimizerSpec, default_portfolio
from .portfolio import (
    AoccConfig,
    PerformanceTable,
    RunCheckpoint,
    read_performance_csv,
    run_portfolio,
    write_performance_csv,
)
from .problems import (
    ScaleFactorCache,
    component_problems,
    evaluate_problem,
    generate_suite,
    GeneratorSpec,
    load_manifest,
    rebuild_problem,
    suite_manifest,
    write_manifest,
)
from .sampling import SampleDesign, derive_seed, repeat_designs, sobol_points
from .selection import (
    FeatureSpace,
    SelectionPlan,
    avg_pairwise_manhattan,
    build_plan_sets,
    read_instance_set,
    write_instance_set,
)


def _load_cfg(args) -> ExperimentConfig:
    if args.desk_scale:
        cfg = desk_scale_config()
    elif args.config:
        cfg = load_config(args.config)
    else:
        raise ConfigError("provide --config FILE or --desk-scale")
    raw = dict(cfg.raw)
    if args.seed_override is not None:
        gen = dict(raw["generator"])
        gen["master_seed"] = int(args.seed_override)
        raw["generator"] = gen
    if args.out:
        raw["output_dir"] = args.out
    return ExperimentConfig(raw)


def _outdir(cfg: ExperimentConfig) -> str:
    os.makedirs(cfg.output_dir, exist_ok=True)
    return cfg.output_dir


def _progress(label):
    def report(done, total):
        step = max(1, total // 20)
        if done % step == 0 or done == total:
            print(f"{label}: {done}/{total}", file=sys.stderr)

    return report


def _portfolio_specs(cfg: ExperimentConfig) -> list[OptimizerSpec]:
    by_name = {s.name: s for s in default_portfolio()}
    return [
        OptimizerSpec(i + 1, name, by_name[name].hyperparameters, by_name[name].population_based)
        for i, name in enumerate(cfg.portfolio["algorithms"])
    ]


def _suite_paths(cfg: ExperimentConfig) -> dict[str, str]:
    out = cfg.output_dir
    return {
        "config": os.path.join(out, "config_used.yaml"),
        "manifest": os.path.join(out, "suite_manifest.json"),
        "scales": os.path.join(out, "scale_factors.json"),
        "features": os.path.join(out, "features.csv"),
        "feature_meta": os.path.join(out, "feature_meta.json"),
        "performance": os.path.join(out, "performance.csv"),
        "checkpoint": os.path.join(out, "perf_checkpoint.jsonl"),
        "sets_dir": os.path.join(out, "sets"),
        "selection_summary": os.path.join(out, "selection_summary.csv"),
        "models_dir": os.path.join(out, "models"),
        "cross_eval": os.path.join(out, "cross_eval.csv"),
        "report_dir": os.path.join(out, "report"),
    }


def cmd_generate(cfg: ExperimentConfig, args) -> None:
    paths = _suite_paths(cfg)
    _outdir(cfg)
    h = cfg.hash()
    cache = ScaleFactorCache()
    comp = component_problems(
        cfg.dimension, int(cfg.generator["component_instances"]), cfg.master_seed,
        cache=cache, start_problem_id=1,
    )
    spec = GeneratorSpec(
        dimension=cfg.dimension,
        counts_per_k=cfg.counts_per_k(),
        instance_pool_size=int(cfg.generator["instance_pool_size"]),
        master_seed=cfg.master_seed,
    )
    gen = generate_suite(spec, cache=cache, start_problem_id=len(comp) + 1)
    manifest = suite_manifest(comp + gen, cfg.dimension, cfg.master_seed, config_hash=h)
    write_manifest(paths["manifest"], manifest)
    cache.save(paths["scales"], config_hash=h)
    write_config(paths["config"], cfg)
    print(f"generated {len(comp)} component + {len(gen)} combined problems -> {paths['manifest']}")


def _load_problems(cfg: ExperimentConfig, paths) -> list:
    manifest = load_manifest(paths["manifest"])
    if manifest.get("config_hash") != cfg.hash():
        from .errors import StalenessError

        raise StalenessError(
            f"suite manifest written under config {manifest.get('config_hash')!r}, "
            f"expected {cfg.hash()!r}"
        )
    cache, _ = ScaleFactorCache.load(paths["scales"])
    return [rebuild_problem(rec, cfg.master_seed, cache=cache) for rec in manifest["problems"]]


def _feature_task(task):
    problem, designs, level_seed = task
    vectors = []
    for design in designs:
        pts = sobol_points(design)
        vals = evaluate_problem(problem, pts)
        vectors.append(
            compute_features(pts, np.asarray(vals), problem_id=problem.problem_id, seed=level_seed)
        )
    return problem.problem_id, vectors


def cmd_features(cfg: ExperimentConfig, args) -> None:
    paths = _suite_paths(cfg)
    h = cfg.hash()
    problems = _load_problems(cfg, paths)
    ela_cfg = cfg.ela
    n_points = int(ela_cfg["sample_factor"]) * cfg.dimension
    base = SampleDesign(n=n_points, d=cfg.dimension, lo=-5.0, hi=5.0)
    tasks = []
    for p in problems:
        designs = repeat_designs(
            base, int(ela_cfg["repetitions"]), derive_seed(cfg.master_seed, "ela", p.problem_id)
        )
        tasks.append((p, designs, int(ela_cfg["level_seed"])))

    results: dict[int, list[FeatureVector]] = {}
    progress = _progress("features")
    if args.jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            for i, (pid, vectors) in enumerate(pool.map(_feature_task, tasks, chunksize=4)):
                results[pid] = vectors
                progress(i + 1, len(tasks))
    else:
        for i, task in enumerate(tasks):
            pid, vectors = _feature_task(task)
            results[pid] = vectors
            progress(i + 1, len(tasks))

    names = list(DEFAULT_CATALOG.names)
    rows = []
    averaged: dict[int, FeatureVector] = {}
    for p in problems:
        vectors = results[p.problem_id]
        for rep, fv in enumerate(vectors):
            rows.append([p.problem_id, str(rep + 1)] + [fv.values[n] if fv.feasible[n] else None for n in names])
        avg = average_feature_repetitions(vectors)
        averaged[p.problem_id] = avg
        rows.append([p.problem_id, "avg"] + [avg.values[n] if avg.feasible[n] else None for n in names])
    write_csv(paths["features"], ["problem_id", "repetition"] + names, rows, config_hash=h)

    ordered = [averaged[p.problem_id] for p in problems]
    matrix = feature_matrix(ordered, names)
    retained = prune_features(matrix, names, threshold=float(ela_cfg["prune_threshold"]))
    bounds = fit_minmax(matrix, names, dimension=cfg.dimension, population=f"{len(problems)} problems")
    write_json(
        paths["feature_meta"],
        {
            "catalog_version": DEFAULT_CATALOG.version,
            "feature_names": names,
            "retained": retained,
            "bounds": {k: list(v) for k, v in bounds.bounds.items()},
            "dimension": cfg.dimension,
        },
        config_hash=h,
    )
    print(f"features for {len(problems)} problems -> {paths['features']} ({len(retained)} retained)")


def _load_features(cfg: ExperimentConfig, paths, *, normalized: bool = True):
    """Averaged feature vectors per problem id, normalized to the retained
    catalog; infeasible entries become NaN (filled at use sites)."""
    h = cfg.hash()
    meta = read_json(paths["feature_meta"], expected_hash=h)
    _, header, rows = read_csv(paths["features"], expected_hash=h)
    names = header[2:]
    retained = list(meta["retained"])
    bounds = {k: tuple(v) for k, v in meta["bounds"].items()}
    take = [names.index(n) for n in retained]
    vectors: dict[int, np.ndarray] = {}
    for row in rows:
        if row[1] != "avg":
            continue
        pid = int(row[0])
        vals = np.array([float(row[2 + j]) if row[2 + j] else np.nan for j in take])
        if normalized:
            out = np.empty(len(retained))
            for i, name in enumerate(retained):
                lo, hi = bounds[name]
                if not np.isfinite(vals[i]) or not (np.isfinite(lo) and np.isfinite(hi)):
                    out[i] = np.nan
                elif lo == hi:
                    out[i] = 0.5
                else:
                    out[i] = float(np.clip((vals[i] - lo) / (hi - lo), 0.0, 1.0))
            vectors[pid] = out
        else:
            vectors[pid] = vals
    return vectors, retained, meta


def cmd_run(cfg: ExperimentConfig, args) -> None:
    paths = _suite_paths(cfg)
    h = cfg.hash()
    problems = _load_problems(cfg, paths)
    specs = _portfolio_specs(cfg)
    if not args.resume and os.path.exists(paths["checkpoint"]):
        os.remove(paths["checkpoint"])
    checkpoint = RunCheckpoint(paths["checkpoint"], h)
    table = run_portfolio(
        problems,
        specs,
        budget_factor=int(cfg.portfolio["budget_factor"]),
        runs=int(cfg.portfolio["runs"]),
        master_seed=cfg.master_seed,
        component_runs=int(cfg.portfolio["component_runs"]),
        checkpoint=checkpoint,
        jobs=args.jobs,
        progress=_progress("runs"),
    )
    write_performance_csv(paths["performance"], table, config_hash=h)
    print(f"performance table ({len(table.problem_ids)} x {len(table.algorithm_ids)}) -> {paths['performance']}")


def _component_entries(manifest) -> list[tuple[int, int, int]]:
    out = []
    for rec in manifest["problems"]:
        if rec.get("kind") == "component":
            cid, iid = rec["active"][0]
            out.append((rec["problem_id"], cid, iid))
    return out


def cmd_select(cfg: ExperimentConfig, args) -> None:
    paths = _suite_paths(cfg)
    h = cfg.hash()
    manifest = load_manifest(paths["manifest"])
    vectors, retained, _ = _load_features(cfg, paths)
    pool = sorted(vectors)
    space = FeatureSpace(pool, np.vstack([vectors[p] for p in pool]))
    sel = cfg.selection
    plan = SelectionPlan(tuple(sel["sizes"]), tuple(sel["repetitions"]), tuple(sel["strategies"]))
    sets = build_plan_sets(
        pool, space, plan, cfg.master_seed,
        component_entries=_component_entries(manifest),
        component_instances=tuple(sel["component_instances"]),
        dimension=cfg.dimension,
    )
    os.makedirs(paths["sets_dir"], exist_ok=True)
    rows = []
    for s in sets:
        write_instance_set(os.path.join(paths["sets_dir"], f"{s.set_id}.json"), s, config_hash=h)
        rows.append([s.set_id, s.strategy, s.size, s.repetition, avg_pairwise_manhattan(s, space)])
    rows.sort(key=lambda r: r[0])
    write_csv(
        paths["selection_summary"],
        ["set_id", "strategy", "size", "repetition", "avg_pairwise_manhattan"],
        rows, config_hash=h,
    )
    print(f"{len(sets)} instance sets -> {paths['sets_dir']}")


def _load_sets(cfg: ExperimentConfig, paths) -> dict:
    h = cfg.hash()
    if not os.path.isdir(paths["sets_dir"]):
        raise DataError(f"missing instance sets under {paths['sets_dir']}")
    sets = {}
    for name in sorted(os.listdir(paths["sets_dir"])):
        if name.endswith(".json"):
            s = read_instance_set(os.path.join(paths["sets_dir"], name), expected_hash=h)
            sets[s.set_id] = s
    if not sets:
        raise DataError(f"no instance sets under {paths['sets_dir']}")
    return sets


def cmd_train(cfg: ExperimentConfig, args) -> None:
    paths = _suite_paths(cfg)
    h = cfg.hash()
    perf = read_performance_csv(paths["performance"], expected_hash=h)
    vectors, retained, meta = _load_features(cfg, paths)
    sets = _load_sets(cfg, paths)
    specs = _portfolio_specs(cfg)
    aids = [s.algorithm_id for s in specs]
    hp = dict(cfg.selector)
    seed_base = int(hp.pop("seed", 1))
    os.makedirs(paths["models_dir"], exist_ok=True)
    for set_id, instance_set in sorted(sets.items()):
        feats = np.vstack([np.nan_to_num(vectors[p], nan=0.5) for p in instance_set.ids])
        dataset = aas.label_instances(
            perf, aids, features=feats, problem_ids=list(instance_set.ids), feature_names=retained
        )
        model = aas.train_selector(dataset, hp, seed=derive_seed(seed_base, "train", set_id))
        model.metadata.update(
            {
                "set_id": set_id,
                "strategy": instance_set.strategy,
                "size": instance_set.size,
                "repetition": instance_set.repetition,
                "catalog_version": meta["catalog_version"],
            }
        )
        model.save(os.path.join(paths["models_dir"], f"{set_id}.json"), config_hash=h)
    print(f"{len(sets)} selector models -> {paths['models_dir']}")


def _load_models(cfg: ExperimentConfig, paths) -> dict:
    h = cfg.hash()
    if not os.path.isdir(paths["models_dir"]):
        raise DataError(f"missing models under {paths['models_dir']}")
    models = {}
    for name in sorted(os.listdir(paths["models_dir"])):
        if name.endswith(".json"):
            m = aas.SelectorModel.load(os.path.join(paths["models_dir"], name), expected_hash=h)
            models[m.metadata["set_id"]] = m
    if not models:
        raise DataError(f"no models under {paths['models_dir']}")
    return models


_EVAL_HEADER = [
    "model_id", "train_strategy", "train_size", "train_rep",
    "eval_id", "eval_strategy", "eval_size", "eval_rep", "n_eval",
    "sbs_id", "sbs_mean", "vbs_mean", "selector_mean", "gap",
    "gap_closed_pct", "diagonal", "zero_gap",
]


def cmd_evaluate(cfg: ExperimentConfig, args) -> None:
    paths = _suite_paths(cfg)
    h = cfg.hash()
    perf = read_performance_csv(paths["performance"], expected_hash=h)
    vectors, retained, _ = _load_features(cfg, paths)
    sets = _load_sets(cfg, paths)
    models = _load_models(cfg, paths)
    pool = sorted(vectors)
    features_by_id = {p: np.nan_to_num(vectors[p], nan=0.5) for p in pool}
    cells = aas.cross_evaluate(models, sets, perf, features_by_id, pool)

    rows = []
    for cell in cells:
        r = cell.report
        rows.append([
            cell.model_id,
            cell.train_meta.get("strategy"), cell.train_meta.get("size"), cell.train_meta.get("repetition"),
            cell.eval_id, cell.eval_meta.get("strategy"), cell.eval_meta.get("size"), cell.eval_meta.get("repetition"),
            cell.eval_meta.get("size"),
            r.sbs_id, r.sbs_mean_aocc, r.vbs_mean_aocc, r.selector_mean_aocc, r.gap,
            r.gap_closed_pct, cell.diagonal, r.zero_gap,
        ])
    # baseline rows: the oracle and the eval-set SBS as constant predictors
    aids = perf.algorithm_ids
    oracle = aas.SelectorModel(aas.OraclePredictor(perf, aids), sorted(aids), retained, [])
    eval_columns = [(eid, list(es.ids), es) for eid, es in sets.items()] + [("pool", pool, None)]
    for eval_id, ids, es in eval_columns:
        feats = np.vstack([features_by_id[i] for i in ids])
        rep = aas.gap_closed(oracle, perf, ids, feats)
        rows.append(["oracle", "oracle", 0, 0, eval_id,
                     es.strategy if es else "pool", es.size if es else len(ids),
                     es.repetition if es else 0, len(ids),
                     rep.sbs_id, rep.sbs_mean_aocc, rep.vbs_mean_aocc, rep.selector_mean_aocc,
                     rep.gap, rep.gap_closed_pct, False, rep.zero_gap])
        const = aas.SelectorModel(
            aas.ConstantPredictor(aas.sbs(perf, ids, aids)), sorted(aids), retained, []
        )
        rep = aas.gap_closed(const, perf, ids, feats)
        rows.append(["sbs_constant", "sbs_constant", 0, 0, eval_id,
                     es.strategy if es else "pool", es.size if es else len(ids),
                     es.repetition if es else 0, len(ids),
                     rep.sbs_id, rep.sbs_mean_aocc, rep.vbs_mean_aocc, rep.selector_mean_aocc,
                     rep.gap, rep.gap_closed_pct, False, rep.zero_gap])
    rows.sort(key=lambda r: (str(r[0]), str(r[4])))
    write_csv(paths["cross_eval"], _EVAL_HEADER, rows, config_hash=h)
    print(f"{len(rows)} evaluation cells -> {paths['cross_eval']}")


def cmd_report(cfg: ExperimentConfig, args) -> None:
    paths = _suite_paths(cfg)
    h = cfg.hash()
    rep_dir = paths["report_dir"]
    os.makedirs(rep_dir, exist_ok=True)
    manifest = load_manifest(paths["manifest"])
    perf = read_performance_csv(paths["performance"], expected_hash=h)
    vectors, retained, _ = _load_features(cfg, paths)
    specs = _portfolio_specs(cfg)
    alg_names = {s.algorithm_id: s.name for s in specs}
    pool = sorted(vectors)

    # Table 1 analogue: mean avg-pairwise distance per (strategy, size)
    _, _, sel_rows = read_csv(paths["selection_summary"], expected_hash=h)
    by_strategy_size: dict = {}
    for row in sel_rows:
        key = (row[1], int(row[2]))
        by_strategy_size.setdefault(key, []).append(float(row[4]))
    t1_rows = [
        [k[0], k[1], float(np.mean(v)), len(v)] for k, v in sorted(by_strategy_size.items())
    ]
    write_csv(
        os.path.join(rep_dir, "table1_distances.csv"),
        ["strategy", "size", "mean_avg_pairwise_manhattan", "n_sets"],
        t1_rows, config_hash=h,
    )

    # powerset gaps + monotonicity/flag summary
    gaps = aas.portfolio_powerset_gaps(perf, min_size=3)
    write_csv(
        os.path.join(rep_dir, "powerset_gaps.csv"),
        ["subset", "size", "sbs_id", "sbs_mean", "vbs_mean", "gap"],
        [["+".join(str(a) for a in r["subset"]), r["size"], r["sbs_id"], r["sbs_mean"], r["vbs_mean"], r["gap"]] for r in gaps],
        config_hash=h,
    )
    full = max(gaps, key=lambda r: r["size"])
    overall_sbs = full["sbs_id"]
    excl = [r for r in gaps if overall_sbs not in r["subset"]]
    best_excl = max(excl, key=lambda r: r["gap"]) if excl else None
    write_json(
        os.path.join(rep_dir, "powerset_summary.json"),
        {
            "full_portfolio_gap": full["gap"],
            "overall_sbs": overall_sbs,
            "best_gap_excluding_sbs": best_excl["gap"] if best_excl else None,
            "best_subset_excluding_sbs": list(best_excl["subset"]) if best_excl else None,
            "larger_gap_without_sbs_exists": bool(best_excl and best_excl["gap"] > full["gap"]),
        },
        config_hash=h,
    )
    plots.plot_powerset_gaps(os.path.join(rep_dir, "powerset_gaps.svg"), gaps, alg_names, hashsalt=h)

    # feature boxplots across problem groups
    kind_by_pid = {rec["problem_id"]: rec.get("kind") for rec in manifest["problems"]}
    k_by_pid = {rec["problem_id"]: len(rec["active"]) for rec in manifest["problems"]}
    gen_ks = sorted({k for p, k in k_by_pid.items() if kind_by_pid[p] == "generated"})
    groups = {"components": [p for p in pool if kind_by_pid[p] == "component"]}
    if gen_ks:
        groups[f"k={gen_ks[0]}"] = [p for p in pool if kind_by_pid[p] == "generated" and k_by_pid[p] == gen_ks[0]]
        groups[f"k={gen_ks[-1]}"] = [p for p in pool if kind_by_pid[p] == "generated" and k_by_pid[p] == gen_ks[-1]]
    plots.plot_feature_boxplots(
        os.path.join(rep_dir, "feature_boxplots.svg"),
        {g: np.vstack([vectors[p] for p in ids]) for g, ids in groups.items() if ids},
        retained, hashsalt=h,
    )

    # PCA projection fitted on the component functions
    comp_ids = [p for p in pool if kind_by_pid[p] == "component"]
    gen_ids = [p for p in pool if kind_by_pid[p] == "generated"]
    fill = lambda ids: np.vstack([np.nan_to_num(vectors[p], nan=0.5) for p in ids])
    if len(comp_ids) >= 3:
        coords_all, _ = aas.pca_project(fill(comp_ids), fill(pool))
        row_of = {p: i for i, p in enumerate(pool)}
        comp_fid = {rec["problem_id"]: rec["active"][0][0] for rec in manifest["problems"] if rec.get("kind") == "component"}
        plots.plot_pca_scatter(
            os.path.join(rep_dir, "pca_scatter.svg"),
            coords_all[[row_of[p] for p in gen_ids]] if gen_ids else np.empty((0, 2)),
            [k_by_pid[p] for p in gen_ids],
            coords_all[[row_of[p] for p in comp_ids]],
            [comp_fid[p] for p in comp_ids],
            hashsalt=h,
        )

    # feature/performance correlation
    A = perf.matrix(pool, perf.algorithm_ids)
    F = fill(pool)
    cols = np.hstack([F, A])
    with np.errstate(invalid="ignore"):
        corr = np.corrcoef(cols, rowvar=False)
    corr = np.nan_to_num(corr, nan=0.0)
    labels = retained + [alg_names.get(a, str(a)) for a in perf.algorithm_ids]
    plots.plot_correlation_heatmap(
        os.path.join(rep_dir, "feature_perf_corr.svg"), corr, labels, labels,
        hashsalt=h, split_after=len(retained),
    )

    # SBS-vs-algorithm scatter
    overall = aas.sbs(perf, pool)
    sbs_col = A[:, perf.algorithm_ids.index(overall)]
    others = {
        alg_names.get(a, str(a)): A[:, j]
        for j, a in enumerate(perf.algorithm_ids)
        if a != overall
    }
    plots.plot_sbs_scatter(os.path.join(rep_dir, "sbs_scatter.svg"), sbs_col, others, hashsalt=h)

    # cross-evaluation heatmap + aggregated heatmap
    _, header, eval_rows = read_csv(paths["cross_eval"], expected_hash=h)
    col = {name: i for i, name in enumerate(header)}
    trained = [r for r in eval_rows if r[col["train_strategy"]] not in ("oracle", "sbs_constant")]
    model_ids = sorted({r[col["model_id"]] for r in trained})
    eval_ids = sorted({r[col["eval_id"]] for r in trained})
    matrix = np.full((len(model_ids), len(eval_ids)), np.nan)
    for r in trained:
        i = model_ids.index(r[col["model_id"]])
        j = eval_ids.index(r[col["eval_id"]])
        if r[col["gap_closed_pct"]] and r[col["diagonal"]] != "true":
            matrix[i, j] = float(r[col["gap_closed_pct"]])
    plots.plot_heatmap(
        os.path.join(rep_dir, "cross_eval_heatmap.svg"), matrix, model_ids, eval_ids,
        hashsalt=h, title="% gap closed (rows: trained on; columns: evaluated on)",
    )

    cells = _cells_from_rows(trained, col)
    agg = aas.aggregate_by_strategy_size(cells)
    write_csv(
        os.path.join(rep_dir, "aggregate_gaps.csv"),
        ["train_strategy", "train_size", "eval_strategy", "eval_size", "mean_gap_closed_pct", "n_cells"],
        [[a["train_strategy"], a["train_size"], a["eval_strategy"], a["eval_size"],
          a["mean_gap_closed_pct"], a["n_cells"]] for a in agg],
        config_hash=h,
    )
    train_keys = sorted({(a["train_strategy"], a["train_size"]) for a in agg})
    eval_keys = sorted({(a["eval_strategy"], a["eval_size"]) for a in agg})
    amat = np.full((len(train_keys), len(eval_keys)), np.nan)
    for a in agg:
        amat[train_keys.index((a["train_strategy"], a["train_size"])),
             eval_keys.index((a["eval_strategy"], a["eval_size"]))] = a["mean_gap_closed_pct"]
    plots.plot_heatmap(
        os.path.join(rep_dir, "aggregate_heatmap.svg"), amat,
        [f"{s} s={z}" for s, z in train_keys], [f"{s} s={z}" for s, z in eval_keys],
        hashsalt=h, title="mean % gap closed by strategy and size",
    )
    print(f"report -> {rep_dir}")


def _cells_from_rows(rows, col) -> list:
    cells = []
    for r in rows:
        pct = float(r[col["gap_closed_pct"]]) if r[col["gap_closed_pct"]] else None
        report = aas.GapReport(
            int(r[col["sbs_id"]]), float(r[col["sbs_mean"]]), float(r[col["vbs_mean"]]),
            float(r[col["selector_mean"]]), float(r[col["gap"]]), pct,
            zero_gap=r[col["zero_gap"]] == "true",
        )
        cells.append(
            aas.CrossEvalCell(
                r[col["model_id"]], r[col["eval_id"]], report,
                r[col["diagonal"]] == "true",
                {"strategy": r[col["train_strategy"]], "size": int(r[col["train_size"]])},
                {"strategy": r[col["eval_strategy"]], "size": int(r[col["eval_size"]])},
            )
        )
    return cells


_COMMANDS = {
    "generate": cmd_generate,
    "features": cmd_features,
    "run": cmd_run,
    "select": cmd_select,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="affinebench",
        description="Affine test-function benchmarking and algorithm-selection laboratory",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment configuration (YAML)")
    common.add_argument("--desk-scale", action="store_true",
                        help="use the built-in desk-scale acceptance preset")
    common.add_argument("--out", help="override the configured output directory")
    common.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    common.add_argument("--seed-override", type=int, default=None,
                        help="replace the configured master seed")
    common.add_argument("--resume", action="store_true",
                        help="reuse an existing run checkpoint")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_cfg(args)
        _COMMANDS[args.command](cfg, args)
    except AffineBenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
