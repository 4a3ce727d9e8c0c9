"""Run harness, trajectory logging, AOCC, and portfolio execution.

The harness owns the evaluation budget: every candidate an optimizer
yields is evaluated against the remaining budget, best-so-far precision
is logged per evaluation, and runs that stop early (internal convergence,
non-finite candidates) are padded by repeating the final best-so-far.

All runs of one (problem, algorithm) cell execute in lockstep so their
candidate batches can be evaluated together; per-run seeding and logic
are untouched, so results equal running each seed on its own.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, DomainError, StalenessError
from .optimizers import OptimizerSpec, make_optimizer
from .problems import ProblemInstance, evaluate_problem
from .sampling import derive_seed


@dataclass(frozen=True)
class AoccConfig:
    """Precision window for the log-scaled anytime score."""

    lower: float = 1e-8
    upper: float = 1e2

    def __post_init__(self):
        if not 0 < self.lower < self.upper:
            raise DomainError("need 0 < lower < upper")


@dataclass
class Trajectory:
    """Best-so-far precision per evaluation for one run."""

    problem_id: int
    algorithm_id: int
    run_index: int
    best_so_far: np.ndarray
    budget: int


class _RunState:
    __slots__ = ("gen", "run_index", "remaining", "best", "current", "pending", "done")

    def __init__(self, gen, run_index, budget):
        self.gen = gen
        self.run_index = run_index
        self.remaining = budget
        self.best: list[float] = []
        self.current = np.inf
        self.pending = None
        self.done = False


def _record(state: _RunState, values: np.ndarray) -> None:
    cur = state.current
    best = state.best
    for v in values.tolist():
        if v < cur:
            cur = v
        best.append(cur)
    state.current = cur
    state.remaining -= len(values)


def _finish(state: _RunState, budget: int) -> np.ndarray:
    traj = np.asarray(state.best, dtype=float)
    if len(traj) < budget:
        pad_value = traj[-1] if len(traj) else np.inf
        traj = np.concatenate([traj, np.full(budget - len(traj), pad_value)])
    return traj


def run_cell(
    spec: OptimizerSpec,
    problem: ProblemInstance,
    budget: int,
    seeds: list[int],
) -> list[Trajectory]:
    """Run one optimizer on one problem for every seed, in lockstep."""
    if budget < 1:
        raise DomainError("budget must be >= 1")
    states = [
        _RunState(make_optimizer(spec, problem.dimension, np.random.default_rng(seed)), i, budget)
        for i, seed in enumerate(seeds)
    ]
    for st in states:
        st.pending = next(st.gen)
    while True:
        active = [st for st in states if not st.done]
        if not active:
            break
        parts, owners = [], []
        for st in active:
            X = st.pending
            if X.ndim == 1:
                X = X[None, :]
            if not math.isfinite(float(X.sum())):
                # optimizer produced non-finite candidates: abort this run
                st.done = True
                st.gen.close()
                continue
            take = min(len(X), st.remaining)
            parts.append(X[:take])
            owners.append((st, take, len(X)))
        if not parts:
            continue
        values = evaluate_problem(problem, np.concatenate(parts))
        pos = 0
        for st, take, requested in owners:
            vals = values[pos:pos + take]
            pos += take
            _record(st, vals)
            if take < requested or st.remaining == 0:
                st.done = True
                st.gen.close()
                continue
            try:
                st.pending = st.gen.send(vals)
            except StopIteration:
                st.done = True
    return [
        Trajectory(problem.problem_id, spec.algorithm_id, st.run_index, _finish(st, budget), budget)
        for st in states
    ]


def run_algorithm(spec: OptimizerSpec, problem: ProblemInstance, budget: int, seed: int) -> Trajectory:
    """Single run; deterministic per (spec, problem, seed)."""
    return run_cell(spec, problem, budget, [seed])[0]


def aocc(trajectory: Trajectory | np.ndarray, cfg: AoccConfig = AoccConfig()) -> float:
    """Area over the convergence curve, in [0, 1].

    Mean over the budget of 1 minus the log-scaled best-so-far precision
    clamped to [lower, upper].
    """
    best = trajectory.best_so_far if isinstance(trajectory, Trajectory) else np.asarray(trajectory, float)
    if len(best) == 0:
        raise DomainError("empty trajectory")
    span = np.log10(cfg.upper) - np.log10(cfg.lower)
    v = (np.log10(np.maximum(best, cfg.lower)) - np.log10(cfg.lower)) / span
    np.clip(v, 0.0, 1.0, out=v)
    return float(np.mean(1.0 - v))


@dataclass
class PerformanceTable:
    """Mean AOCC per (problem, algorithm), plus the per-run values."""

    problem_ids: list[int]
    algorithm_ids: list[int]
    dimension: int
    budget_factor: int
    aocc_runs: dict = field(default_factory=dict)  # (pid, aid) -> list[float]

    def mean(self, pid: int, aid: int) -> float:
        return float(np.mean(self.aocc_runs[(pid, aid)]))

    def runs(self, pid: int, aid: int) -> int:
        return len(self.aocc_runs[(pid, aid)])

    def matrix(self, problem_ids=None, algorithm_ids=None) -> np.ndarray:
        pids = self.problem_ids if problem_ids is None else list(problem_ids)
        aids = self.algorithm_ids if algorithm_ids is None else list(algorithm_ids)
        out = np.empty((len(pids), len(aids)))
        for i, p in enumerate(pids):
            for j, a in enumerate(aids):
                out[i, j] = self.mean(p, a)
        return out

    def is_complete(self) -> bool:
        return all((p, a) in self.aocc_runs for p in self.problem_ids for a in self.algorithm_ids)


class RunCheckpoint:
    """Incremental JSONL persistence of completed (problem, algorithm) cells."""

    def __init__(self, path, state_hash: str):
        self.path = path
        self.state_hash = state_hash
        self.cells: dict = {}

    def load(self) -> None:
        if not os.path.exists(self.path):
            return
        with open(self.path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                if rec.get("config_hash") != self.state_hash:
                    raise StalenessError(
                        f"checkpoint {self.path} was written under config "
                        f"{rec.get('config_hash')!r}, current is {self.state_hash!r}"
                    )
                self.cells[(rec["problem_id"], rec["algorithm_id"])] = rec["aocc"]

    def append(self, pid: int, aid: int, values: list[float]) -> None:
        self.cells[(pid, aid)] = values
        rec = {"problem_id": pid, "algorithm_id": aid, "aocc": values, "config_hash": self.state_hash}
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(rec) + "\n")


def _cell_task(args):
    spec, problem, budget, seeds, cfg = args
    trajs = run_cell(spec, problem, budget, seeds)
    return problem.problem_id, spec.algorithm_id, [aocc(t, cfg) for t in trajs]


def run_portfolio(
    suite: list[ProblemInstance],
    portfolio: list[OptimizerSpec],
    budget_factor: int = 2000,
    runs: int = 15,
    master_seed: int = 0,
    *,
    component_runs: int | None = None,
    aocc_cfg: AoccConfig = AoccConfig(),
    checkpoint: RunCheckpoint | None = None,
    jobs: int = 1,
    progress=None,
) -> PerformanceTable:
    """Mean AOCC per (problem, algorithm) over seeded independent runs.

    Seeds derive from (master_seed, problem, algorithm, run index), so any
    execution order and any resume point produce the same table.
    """
    if not suite or not portfolio:
        raise DomainError("need a nonempty suite and portfolio")
    table = PerformanceTable(
        problem_ids=[p.problem_id for p in suite],
        algorithm_ids=[s.algorithm_id for s in portfolio],
        dimension=suite[0].dimension,
        budget_factor=budget_factor,
    )
    if checkpoint is not None:
        checkpoint.load()
        table.aocc_runs.update(checkpoint.cells)

    def n_runs(problem):
        if component_runs is not None and problem.kind == "component":
            return component_runs
        return runs

    tasks = []
    for problem in suite:
        for spec in portfolio:
            key = (problem.problem_id, spec.algorithm_id)
            if key in table.aocc_runs:
                continue
            # keyed by optimizer name, so a duplicated optimizer under a
            # fresh id reproduces the same runs
            seeds = [
                derive_seed(master_seed, "run", problem.problem_id, spec.name, r)
                for r in range(n_runs(problem))
            ]
            tasks.append((spec, problem, budget_factor * problem.dimension, seeds, aocc_cfg))

    done = 0
    if jobs > 1 and len(tasks) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for pid, aid, values in pool.map(_cell_task, tasks, chunksize=8):
                table.aocc_runs[(pid, aid)] = values
                if checkpoint is not None:
                    checkpoint.append(pid, aid, values)
                done += 1
                if progress:
                    progress(done, len(tasks))
    else:
        for task in tasks:
            pid, aid, values = _cell_task(task)
            table.aocc_runs[(pid, aid)] = values
            if checkpoint is not None:
                checkpoint.append(pid, aid, values)
            done += 1
            if progress:
                progress(done, len(tasks))
    return table


def write_performance_csv(path, table: PerformanceTable, config_hash: str = "") -> None:
    """problem_id, algorithm_id, runs, mean_aocc, then per-run AOCC columns."""
    max_runs = max((len(v) for v in table.aocc_runs.values()), default=0)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# config_hash={config_hash}\n")
        header = ["problem_id", "algorithm_id", "runs", "mean_aocc"]
        header += [f"aocc_run_{r}" for r in range(max_runs)]
        fh.write(",".join(header) + "\n")
        for pid in sorted(table.problem_ids):
            for aid in sorted(table.algorithm_ids):
                values = table.aocc_runs[(pid, aid)]
                row = [str(pid), str(aid), str(len(values)), repr(float(np.mean(values)))]
                row += [repr(float(v)) for v in values]
                row += [""] * (max_runs - len(values))
                fh.write(",".join(row) + "\n")


def read_performance_csv(path, expected_hash: str | None = None) -> PerformanceTable:
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except FileNotFoundError as exc:
        raise DataError(f"missing performance table {path}") from exc
    if not lines or not lines[0].startswith("# config_hash="):
        raise DataError(f"{path} lacks a config-hash line")
    found = lines[0].split("=", 1)[1]
    if expected_hash is not None and found != expected_hash:
        raise StalenessError(f"{path} written under config {found!r}, expected {expected_hash!r}")
    header = lines[1].split(",")
    n_fixed = 4
    table = PerformanceTable([], [], dimension=0, budget_factor=0)
    pids, aids = set(), set()
    for line in lines[2:]:
        if not line:
            continue
        cells = line.split(",")
        pid, aid = int(cells[0]), int(cells[1])
        values = [float(c) for c in cells[n_fixed:] if c]
        table.aocc_runs[(pid, aid)] = values
        pids.add(pid)
        aids.add(aid)
    table.problem_ids = sorted(pids)
    table.algorithm_ids = sorted(aids)
    if len(header) < n_fixed:
        raise DataError(f"{path} has a malformed header")
    return table
