import numpy as np
import pytest
from scipy.stats import qmc

from affinebench.errors import DomainError
from affinebench.sampling import (
    MAX_DIMENSION,
    SampleDesign,
    derive_seed,
    raw_sobol,
    repeat_designs,
    sobol_points,
)


def test_first_points_d1_match_reference():
    # after skipping the all-zeros point: 0.5, 0.75, 0.25
    pts = sobol_points(SampleDesign(n=3, d=1))
    assert pts.ravel().tolist() == [0.5, 0.75, 0.25]


@pytest.mark.parametrize("d", list(range(1, MAX_DIMENSION + 1)))
def test_matches_reference_direction_numbers(d):
    mine = raw_sobol(128, d, skip=0)
    ref = qmc.Sobol(d=d, scramble=False).random(128)
    assert np.array_equal(mine, ref)


def test_points_within_bounds():
    design = SampleDesign(n=500, d=4, lo=-5.0, hi=5.0, scramble_seed=77)
    pts = sobol_points(design)
    assert pts.shape == (500, 4)
    assert np.all(pts >= -5.0) and np.all(pts <= 5.0)


def test_deterministic_per_design():
    design = SampleDesign(n=64, d=3, scramble_seed=123)
    assert np.array_equal(sobol_points(design), sobol_points(design))


def _star_discrepancy_grid(pts, grid=32):
    n = len(pts)
    worst = 0.0
    for i in range(1, grid + 1):
        for j in range(1, grid + 1):
            a, b = i / grid, j / grid
            frac = np.mean((pts[:, 0] < a) & (pts[:, 1] < b))
            worst = max(worst, abs(frac - a * b))
    return worst


def test_discrepancy_beats_uniform():
    sob = sobol_points(SampleDesign(n=1024, d=2))
    d_sob = _star_discrepancy_grid(sob)
    rng = np.random.default_rng(2024)
    for _ in range(10):
        uni = rng.uniform(size=(1024, 2))
        assert d_sob < _star_discrepancy_grid(uni)


def _elementary_intervals_ok(pts, m, d, t):
    """Every base-2 elementary interval of volume 2^t/2^m holds exactly 2^t points."""
    def splits(total, parts):
        if parts == 1:
            yield (total,)
            return
        for h in range(total + 1):
            for rest in splits(total - h, parts - 1):
                yield (h,) + rest

    for exps in splits(m - t, d):
        cells: dict = {}
        for p in pts:
            key = tuple(int(p[j] * (1 << exps[j])) for j in range(d))
            cells[key] = cells.get(key, 0) + 1
        if any(v != (1 << t) for v in cells.values()):
            return False
    return True


@pytest.mark.parametrize("d,t", [(1, 0), (2, 0), (3, 1)])
@pytest.mark.parametrize("m", [2, 4, 6])
def test_net_structure_plain_and_scrambled(d, t, m):
    # d=1,2 are (0,m,d)-nets; d=3 of the Sobol construction is a (1,m,3)-net
    n = 1 << m
    plain = raw_sobol(n, d, skip=0)
    assert _elementary_intervals_ok(plain, m, d, t)
    scrambled = sobol_points(SampleDesign(n=n, d=d, scramble_seed=99))
    # scrambling preserves the digital-net structure; the skipped zero point
    # is irrelevant here because the XOR shift relabels the whole net
    ints = (plain * float(1 << 32)).astype(np.uint64)
    shift = np.random.default_rng(99).integers(0, 1 << 32, size=d, dtype=np.uint64)
    reshift = np.bitwise_xor(ints, shift).astype(float) / float(1 << 32)
    assert _elementary_intervals_ok(reshift, m, d, t)
    assert np.all(scrambled >= 0.0) and np.all(scrambled < 1.0)


def test_unsupported_dimension():
    with pytest.raises(DomainError):
        sobol_points(SampleDesign(n=4, d=MAX_DIMENSION + 1))


def test_repeat_designs_distinct_seeds():
    base = SampleDesign(n=100, d=2, lo=-5, hi=5)
    reps = repeat_designs(base, repetitions=5, seed=7)
    assert len(reps) == 5
    seeds = [r.scramble_seed for r in reps]
    assert len(set(seeds)) == 5
    assert all(s != 0 for s in seeds)
    again = repeat_designs(base, repetitions=5, seed=7)
    assert [r.scramble_seed for r in again] == seeds


def test_repeat_designs_single_is_stable():
    base = SampleDesign(n=10, d=1)
    one = repeat_designs(base, repetitions=1, seed=3)
    two = repeat_designs(base, repetitions=1, seed=3)
    assert one == two


def test_master_seeds_give_disjoint_scramble_tuples():
    base = SampleDesign(n=10, d=2)
    seen = {}
    for s in range(10_000):
        tup = tuple(r.scramble_seed for r in repeat_designs(base, 2, seed=s))
        assert tup not in seen
        seen[tup] = s


def test_derive_seed_stable_and_spread():
    a = derive_seed(42, "instance", 1, 2, 3)
    assert a == derive_seed(42, "instance", 1, 2, 3)
    assert a != derive_seed(42, "instance", 1, 2, 4)
    assert a != derive_seed(43, "instance", 1, 2, 3)
