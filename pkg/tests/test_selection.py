import itertools

import numpy as np
import pytest

from affinebench.errors import CapacityError, DataError, DomainError
from affinebench.functions import registry_size
from affinebench.selection import (
    FeatureSpace,
    InstanceSet,
    SelectionPlan,
    avg_pairwise_manhattan,
    build_plan_sets,
    read_instance_set,
    select_components,
    select_greedy,
    select_random,
    write_instance_set,
)


def _space(values):
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    return FeatureSpace(list(range(1, len(values) + 1)), values)


def test_select_random_exhausts_pool():
    s = select_random([1, 2, 3, 4], 4, set(), seed=9)
    assert sorted(s.ids) == [1, 2, 3, 4]


def test_select_random_respects_exclusion_and_capacity():
    a = select_random(list(range(10)), 5, set(), seed=1)
    b = select_random(list(range(10)), 5, set(a.ids), seed=2)
    assert not (set(a.ids) & set(b.ids))
    with pytest.raises(CapacityError):
        select_random(list(range(10)), 6, set(a.ids), seed=3)


def test_select_random_uniformity():
    counts = {i: 0 for i in range(4)}
    from affinebench.sampling import derive_seed

    for t in range(10_000):
        s = select_random([0, 1, 2, 3], 1, set(), seed=derive_seed(5, "unif", t))
        counts[s.ids[0]] += 1
    sigma = np.sqrt(10_000 * 0.25 * 0.75)
    for c in counts.values():
        assert abs(c - 2500) < 3 * sigma


def test_greedy_extremes_on_line():
    space = _space([0.0, 0.5, 1.0])
    s = select_greedy([1, 2, 3], space, 2, set())
    assert set(s.ids) == {1, 3}


def test_greedy_hand_enumerated_sequence():
    # candidates at 0, 1, 3, 4: the extremes 0 and 4 tie at distance 2 from
    # the centroid, so the lowest id (the candidate at 0) starts; 4 follows
    # (min-dist 4); then 1 vs 3 tie at min-dist 1 and the lowest id wins.
    space = _space([0.0, 1.0, 3.0, 4.0])
    s = select_greedy([1, 2, 3, 4], space, 3, set())
    assert list(s.ids) == [1, 4, 2]
    assert set(s.ids) <= {1, 2, 3, 4}


def test_greedy_avoids_duplicates_while_distinct_exist():
    space = _space([0.0, 0.0, 1.0, 1.0])
    s = select_greedy([1, 2, 3, 4], space, 2, set())
    assert len({tuple(space.rows([i])[0]) for i in s.ids}) == 2


def test_greedy_deterministic():
    rng = np.random.default_rng(0)
    space = FeatureSpace(list(range(30)), rng.uniform(size=(30, 4)))
    a = select_greedy(range(30), space, 10, set())
    b = select_greedy(range(30), space, 10, set())
    assert a.ids == b.ids


def test_greedy_matches_exhaustive_maximin():
    # independent oracle: enumerate candidates directly per pick
    rng = np.random.default_rng(42)
    for trial in range(100):
        n = int(rng.integers(4, 9))
        f = int(rng.integers(1, 3))
        F = np.round(rng.uniform(size=(n, f)), 3)
        ids = list(range(1, n + 1))
        space = FeatureSpace(ids, F)
        picks = select_greedy(ids, space, 3, set()).ids

        centroid = F.mean(axis=0)
        d0 = np.abs(F - centroid).sum(axis=1)
        best0 = ids[int(np.argmax(d0))]
        assert picks[0] == best0
        chosen = [best0]
        for step in range(2):
            best_id, best_score = None, -1.0
            for cand in ids:
                if cand in chosen:
                    continue
                score = min(
                    np.abs(F[ids.index(cand)] - F[ids.index(c)]).sum() for c in chosen
                )
                if score > best_score + 1e-15:
                    best_id, best_score = cand, score
            assert picks[step + 1] == best_id
            chosen.append(best_id)


def test_infeasible_features_enter_as_half():
    M = np.array([[0.0], [np.nan], [1.0]])
    space = FeatureSpace([1, 2, 3], M)
    assert space.rows([2])[0][0] == 0.5


def test_select_components_sizes():
    entries = [
        (100 + (cid - 1) * 5 + iid, cid, iid)
        for cid in range(1, registry_size() + 1)
        for iid in range(1, 6)
    ]
    s5 = select_components(entries, 5)
    assert s5.size == registry_size() * 5
    s1 = select_components(entries, 1)
    assert s1.size == registry_size()
    missing = [e for e in entries if not (e[1] == 3 and e[2] == 5)]
    with pytest.raises(DataError):
        select_components(missing, 5)


def test_avg_pairwise_manhattan_hand_values():
    space = _space([0.0, 1.0, 3.0])
    assert avg_pairwise_manhattan([1, 2, 3], space) == pytest.approx(2.0)
    assert avg_pairwise_manhattan([1, 2], space) == pytest.approx(1.0)
    same = _space([0.7, 0.7, 0.7])
    assert avg_pairwise_manhattan([1, 2, 3], same) == 0.0
    with pytest.raises(DomainError):
        avg_pairwise_manhattan([1], space)


def test_plan_disjoint_repetitions():
    rng = np.random.default_rng(1)
    ids = list(range(1, 101))
    space = FeatureSpace(ids, rng.uniform(size=(100, 3)))
    plan = SelectionPlan(sizes=(10, 20), repetitions=(3, 2), strategies=("random", "greedy"))
    sets = build_plan_sets(ids, space, plan, master_seed=4)
    by_key: dict = {}
    for s in sets:
        by_key.setdefault((s.strategy, s.size), []).append(s)
    for group in by_key.values():
        for a, b in itertools.combinations(group, 2):
            assert not (set(a.ids) & set(b.ids))


def test_plan_capacity_guard():
    ids = list(range(10))
    plan = SelectionPlan(sizes=(6,), repetitions=(2,), strategies=("random",))
    with pytest.raises(CapacityError):
        build_plan_sets(ids, None, plan, master_seed=0)


def test_instance_set_invariants():
    with pytest.raises(DomainError):
        InstanceSet((1, 1), "random", 2, 0)
    with pytest.raises(DomainError):
        InstanceSet((1, 2), "random", 2, 0, frozenset({2}))
    with pytest.raises(DomainError):
        InstanceSet((1, 2, 3), "random", 2, 0)


def test_instance_set_roundtrip(tmp_path):
    s = InstanceSet((5, 2, 9), "greedy", 3, 1, frozenset({1}), dimension=2)
    path = tmp_path / "set.json"
    write_instance_set(path, s, config_hash="hh")
    loaded = read_instance_set(path, expected_hash="hh")
    assert loaded.ids == s.ids
    assert loaded.strategy == "greedy"
    assert loaded.repetition == 1
    from affinebench.errors import StalenessError

    with pytest.raises(StalenessError):
        read_instance_set(path, expected_hash="other")
