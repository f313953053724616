import math

import numpy as np
import pytest

from cpquery import fixtures
from cpquery.demand import phi_integral, phi_stationary
from cpquery.geometry import x_separations
from cpquery.harness.simulate import degree_series, replay
from cpquery.motion import Scenario, Trajectory, configuration_at
from cpquery.schemes import SchemeConfig, SchemeError
from cpquery.schemes.bucket import oracle_init, run_bucket

X = 4


@pytest.fixture(scope="module")
def grid():
    scn = fixtures.gen_grid(5)
    sig = x_separations(configuration_at(scn, 0.0), X)
    scn.horizon = 100.0 * float(sig.max())
    return scn


@pytest.fixture(scope="module")
def runs(grid):
    return {mode: run_bucket(grid, SchemeConfig(f"bucket_{mode}", X)) for mode in ("basic", "refined")}


def bucket_part(tr):
    k = tr.meta["init_queries"]
    return np.asarray(tr.times[k:]), np.asarray(tr.entities[k:]), np.asarray(tr.meta["query_levels"])


@pytest.mark.parametrize("mode", ["basic", "refined"])
def test_stationary_degree_stays_bounded(grid, runs, mode):
    tr = runs[mode]
    # the warm start queries everyone at t0 = 0, tie-broken by picoseconds
    times = np.linspace(1e-9, grid.horizon, 3000)
    assert degree_series(replay(grid, tr, times)).max() <= X


@pytest.mark.parametrize("mode", ["basic", "refined"])
def test_wait_bound(runs, mode):
    meta = runs[mode].meta
    assert meta["wait_violations"] == 0
    assert meta["max_wait_ratio"] <= 1.0 + 1e-9


def test_refined_query_times_are_distinct(runs):
    t, _, _ = bucket_part(runs["refined"])
    assert np.all(np.diff(t) > 0)
    assert len(set(t.tolist())) == len(t)


def nested_or_disjoint(buckets):
    for k1, (b1, i1) in enumerate(buckets):
        lo1, hi1 = math.ldexp(i1, b1), math.ldexp(i1 + 1, b1)
        for k2, (b2, i2) in enumerate(buckets):
            if k1 == k2 or b2 > b1:
                continue
            lo2, hi2 = math.ldexp(i2, b2), math.ldexp(i2 + 1, b2)
            if hi2 <= lo1 or hi1 <= lo2:
                continue
            if b2 == b1:
                return False
            mid = 0.5 * (lo1 + hi1)
            if not (hi2 <= mid or lo2 >= mid):
                return False
    return True


def test_refined_buckets_nest_in_halves(runs):
    snaps = runs["refined"].meta["bucket_snapshots"]
    assert len(snaps) > 10
    for snap in snaps:
        assert nested_or_disjoint(snap)
        mids = [math.ldexp(i + 0.5, b) for b, i in snap]
        assert len(set(mids)) == len(mids)


def test_nesting_checker():
    assert nested_or_disjoint([(2, 0), (1, 1), (0, 0)])
    assert nested_or_disjoint([(2, 0), (2, 1)])
    assert not nested_or_disjoint([(1, 0), (1, 0)])


@pytest.mark.parametrize("mode", ["basic", "refined"])
def test_granularity_law(grid, runs, mode):
    t, _, lv = bucket_part(runs[mode])
    gaps = np.diff(t)
    quarter = np.minimum(np.ldexp(1.0, lv[:-1]), np.ldexp(1.0, lv[1:])) / 4
    assert np.all(gaps >= quarter * (1 - 1e-9))
    phi = phi_stationary(configuration_at(grid, 0.0), X)
    scaled = gaps * phi
    assert scaled.max() / scaled.min() <= 64


@pytest.mark.parametrize("mode", ["basic", "refined"])
def test_demand_law_over_windows(grid, runs, mode):
    tr = runs[mode]
    t, _, _ = bucket_part(tr)
    n = grid.n
    lam = tr.meta["lam"]
    fitted = math.inf
    for start in range(0, len(t) - 3 * n, len(t) // 40):
        a, b = float(t[start]), float(t[start + 3 * n - 1])
        fitted = min(fitted, phi_integral(grid, X, (a, b)) / n)
    # each entity is queried at most once per bucket of length > lam * sigma / 96
    assert fitted >= lam / 96
    print(f"{mode}: fitted demand constant {fitted:.4f} (floor {lam / 96:.4f})")


def test_random_planar_scene_with_lemma_init():
    scn = fixtures.gen_random(5, 12, 2, 0.02, horizon=160.0)
    x = 8
    tr = run_bucket(scn, SchemeConfig("bucket_refined", x, params={"t0": 100.0}), init="lemma")
    assert tr.meta["init"] == "lemma-init"
    times = np.linspace(100.0, 160.0, 600)
    assert degree_series(replay(scn, tr, times)).max() <= x
    assert tr.meta["wait_violations"] == 0


def test_mobile_scene_keeps_degree_and_perception():
    scn = fixtures.gen_random(9, 10, 1, 0.05, mobile=True, wander=1.5, horizon=40.0)
    x = 4
    tr = run_bucket(scn, SchemeConfig("bucket_basic", x))
    times = np.linspace(1.0, 40.0, 400)
    rep = replay(scn, tr, times)
    assert degree_series(rep).max() <= x
    # the scheme checks the sandwich at every query and raises on a breach
    assert tr.meta["wait_violations"] == 0


def test_supplied_init_is_copied():
    scn = fixtures.gen_grid(6)
    scn.horizon = 30.0
    init_trace, st = oracle_init(scn, 0.0)
    clock, n_init = st.clock, len(init_trace)
    tr = run_bucket(scn, SchemeConfig("bucket_refined", X), init=(init_trace, st))
    assert tr.meta["init"] == "supplied-init"
    assert st.clock == clock and len(init_trace) == n_init
    assert tr.meta["init_queries"] == n_init


def test_too_few_entities():
    with pytest.raises(SchemeError):
        run_bucket(fixtures.gen_grid(4), SchemeConfig("bucket_basic", X))


def test_broken_preconditions_are_detected():
    # entity 1 rushes toward 0 faster than a stale warm start can track
    trajs = [
        Trajectory.stationary([0.0]),
        Trajectory.from_waypoints([(0.0, [40.0]), (36.0, [4.0])]),
        Trajectory.stationary([80.0]),
        Trajectory.stationary([120.0]),
        Trajectory.stationary([160.0]),
        Trajectory.stationary([200.0]),
    ]
    scn = Scenario(dim=1, rho=0.5, trajectories=trajs, horizon=36.0)
    init_trace, st = oracle_init(scn, 0.0)
    # pretend entity 1 was last seen far away
    st.perceived[1] = [400.0]
    with pytest.raises(SchemeError):
        run_bucket(scn, SchemeConfig("bucket_basic", X), init=(init_trace, st))
