import json
import os
import shutil

import numpy as np
import pytest
import yaml

from affinebench.cli import main

MICRO = {
    "dimension": 2,
    "generator": {"counts_per_k": {2: 6, 3: 6}, "master_seed": 777, "component_instances": 2},
    "ela": {"sample_factor": 50, "repetitions": 2},
    "portfolio": {
        "algorithms": ["random_search", "es_one_plus_one", "particle_swarm"],
        "budget_factor": 30,
        "runs": 2,
        "component_runs": 2,
    },
    "selection": {
        "sizes": [5],
        "repetitions": [2],
        "strategies": ["random", "greedy", "components"],
        "component_instances": [1],
    },
    "selector": {"n_rounds": 20, "max_depth": 4},
}


@pytest.fixture(scope="module")
def micro_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("micro")
    cfg_path = root / "config.yaml"
    out = root / "out"
    doc = dict(MICRO)
    doc["output_dir"] = str(out)
    cfg_path.write_text(yaml.safe_dump(doc))
    for verb in ("generate", "features", "run", "select", "train", "evaluate", "report"):
        assert main([verb, "--config", str(cfg_path)]) == 0
    return cfg_path, out


def test_pipeline_artifacts_exist(micro_run):
    _, out = micro_run
    for name in (
        "suite_manifest.json",
        "scale_factors.json",
        "features.csv",
        "feature_meta.json",
        "performance.csv",
        "selection_summary.csv",
        "cross_eval.csv",
    ):
        assert (out / name).exists(), name
    assert (out / "sets").is_dir() and len(list((out / "sets").glob("*.json"))) == 5
    assert (out / "models").is_dir() and len(list((out / "models").glob("*.json"))) == 5
    report = out / "report"
    for name in (
        "table1_distances.csv",
        "aggregate_gaps.csv",
        "powerset_gaps.csv",
        "powerset_summary.json",
        "feature_boxplots.svg",
        "pca_scatter.svg",
        "feature_perf_corr.svg",
        "sbs_scatter.svg",
        "powerset_gaps.svg",
        "cross_eval_heatmap.svg",
        "aggregate_heatmap.svg",
    ):
        assert (report / name).exists(), name


def test_suite_composition(micro_run):
    _, out = micro_run
    manifest = json.loads((out / "suite_manifest.json").read_text())
    kinds = [p["kind"] for p in manifest["problems"]]
    assert kinds.count("component") == 48  # 24 functions x 2 instances
    assert kinds.count("generated") == 12
    ks = [len(p["active"]) for p in manifest["problems"] if p["kind"] == "generated"]
    assert sorted(set(ks)) == [2, 3]
    weights = [sum(p["weights"]) for p in manifest["problems"]]
    assert all(abs(w - 1.0) < 1e-12 for w in weights)


def test_feature_rows_cover_reps_and_avg(micro_run):
    _, out = micro_run
    lines = (out / "features.csv").read_text().splitlines()
    assert lines[0].startswith("# config_hash=")
    rows = [l.split(",") for l in lines[2:]]
    n_problems = 60
    assert len(rows) == n_problems * 3  # 2 repetitions + avg
    meta = json.loads((out / "feature_meta.json").read_text())
    assert meta["retained"]
    header = lines[1].split(",")
    assert header[:2] == ["problem_id", "repetition"]


def test_performance_budget_column(micro_run):
    _, out = micro_run
    lines = (out / "performance.csv").read_text().splitlines()
    rows = [l.split(",") for l in lines[2:]]
    assert len(rows) == 60 * 3
    # runs column
    assert all(r[2] == "2" for r in rows)
    means = [float(r[3]) for r in rows]
    assert all(0.0 <= m <= 1.0 for m in means)


def test_cross_eval_matrix_shape(micro_run):
    _, out = micro_run
    lines = (out / "cross_eval.csv").read_text().splitlines()
    header = lines[1].split(",")
    rows = [l.split(",") for l in lines[2:]]
    col = {n: i for i, n in enumerate(header)}
    trained = [r for r in rows if r[col["train_strategy"]] not in ("oracle", "sbs_constant")]
    # |models| x (|eval sets| + unseen)
    assert len(trained) == 5 * (5 + 1)
    oracle_rows = [r for r in rows if r[col["model_id"]] == "oracle"]
    for r in oracle_rows:
        if r[col["zero_gap"]] == "false":
            assert abs(float(r[col["gap_closed_pct"]]) - 100.0) < 1e-9


def test_exit_codes(tmp_path):
    # config error
    assert main(["generate", "--config", str(tmp_path / "missing.yaml")]) == 2
    bad = tmp_path / "bad.yaml"
    bad.write_text("dimension: 0\n")
    assert main(["generate", "--config", str(bad)]) == 2
    # data error: features before generate
    cfg = tmp_path / "ok.yaml"
    doc = dict(MICRO)
    doc["output_dir"] = str(tmp_path / "out")
    cfg.write_text(yaml.safe_dump(doc))
    assert main(["features", "--config", str(cfg)]) == 3
    # staleness: artifact written under a different master seed
    assert main(["generate", "--config", str(cfg)]) == 0
    assert main(["features", "--config", str(cfg), "--seed-override", "1234"]) == 5


def test_rerun_byte_identical(micro_run, tmp_path):
    cfg_path, out = micro_run
    doc = yaml.safe_load(cfg_path.read_text())
    out2 = tmp_path / "out2"
    doc["output_dir"] = str(out2)
    cfg2 = tmp_path / "config2.yaml"
    cfg2.write_text(yaml.safe_dump(doc))
    for verb, jobs in (
        ("generate", "1"), ("features", "2"), ("run", "2"),
        ("select", "1"), ("train", "1"), ("evaluate", "1"),
    ):
        assert main([verb, "--config", str(cfg2), "--jobs", jobs]) == 0
    for name in ("suite_manifest.json", "scale_factors.json", "features.csv",
                 "feature_meta.json", "performance.csv", "selection_summary.csv",
                 "cross_eval.csv"):
        a = (out / name).read_bytes()
        b = (out2 / name).read_bytes()
        assert a == b, f"{name} differs between runs"


def test_run_resume_equals_fresh(micro_run, tmp_path):
    cfg_path, out = micro_run
    doc = yaml.safe_load(cfg_path.read_text())
    out3 = tmp_path / "out3"
    doc["output_dir"] = str(out3)
    cfg3 = tmp_path / "config3.yaml"
    cfg3.write_text(yaml.safe_dump(doc))
    assert main(["generate", "--config", str(cfg3)]) == 0
    assert main(["features", "--config", str(cfg3)]) == 0
    assert main(["run", "--config", str(cfg3)]) == 0
    # truncate the checkpoint to half and resume
    ckpt = out3 / "perf_checkpoint.jsonl"
    lines = ckpt.read_text().splitlines()
    ckpt.write_text("\n".join(lines[: len(lines) // 2]) + "\n")
    assert main(["run", "--config", str(cfg3), "--resume"]) == 0
    assert (out3 / "performance.csv").read_bytes() == (out / "performance.csv").read_bytes()


def test_desk_scale_preset_loads(tmp_path):
    from affinebench.config import desk_scale_config

    cfg = desk_scale_config()
    assert cfg.dimension == 2
    assert sum(cfg.counts_per_k().values()) == 600
    assert len(cfg.portfolio["algorithms"]) == 5
    assert cfg.selection["sizes"] == [24, 120]
