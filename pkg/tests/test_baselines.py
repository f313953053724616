import numpy as np
import pytest

from cpquery import fixtures
from cpquery.harness.simulate import degree_series, ply_series, replay
from cpquery.schemes import SchemeConfig, SchemeError, run_scheme
from cpquery.schemes.baselines import oblivious_window_config, run_round_robin


def test_round_robin_gap_is_n_times_granularity():
    scn = fixtures.gen_grid(5)
    scn.horizon = 20.0
    tr = run_round_robin(scn, SchemeConfig("round_robin", 1, params={"granularity": 0.5}))
    for i in range(5):
        assert np.allclose(np.diff(tr.query_times_of(i)), 5 * 0.5)
    assert tr.min_granularity() == pytest.approx(0.5)


def test_round_robin_segments_play_back_to_back():
    scn = fixtures.gen_grid(3)
    scn.horizon = 10.0
    cfg = SchemeConfig("round_robin", 1, params={"segments": [[0, 1, 3], [6, 0.5, 3]]})
    tr = run_round_robin(scn, cfg)
    assert tr.times == [0.0, 1.0, 2.0, 6.0, 6.5, 7.0]
    assert tr.entities == [0, 1, 2, 0, 1, 2]


def test_pairs_deadline_script():
    scn = fixtures.gen_pairs_fixture(8)
    tr = run_scheme(scn, SchemeConfig("clairvoyant", 1, params={"script": "deadline"}))
    assert len(tr) == 8 and tr.clairvoyant
    assert tr.min_granularity() == pytest.approx(1.0)
    assert tr.times[-1] == pytest.approx(scn.target_time)
    # widest pairs first
    seps = {2 * k + j: s for k, s in enumerate(scn.expectations["pair_separations"]) for j in (0, 1)}
    order = [seps[i] for i in tr.entities]
    assert order == sorted(order, reverse=True)
    assert degree_series(replay(scn, tr, [scn.target_time]))[0] == 1


@pytest.mark.parametrize("x,beta", [(5, 0.0), (5, 0.2), (9, 0.0), (9, 1 / 9)])
def test_reversal_script_keeps_degree(x, beta):
    scn = fixtures.gen_reversal_fixture(x, beta)
    tr = run_scheme(scn, SchemeConfig("clairvoyant", x, beta=beta, params={"script": "reversal"}))
    assert tr.min_granularity() == pytest.approx(1.0)
    times = np.arange(scn.expectations["sweep_end"], scn.horizon, 0.01)
    assert degree_series(replay(scn, tr, times)).max() <= scn.expectations["degree_bound"]


@pytest.mark.parametrize("x,beta", [(9, 0.0), (5, 0.2), (7, 0.0)])
def test_cluster_script_keeps_ply(x, beta):
    scn = fixtures.gen_cluster_fixture(x, beta)
    tr = run_scheme(scn, SchemeConfig("clairvoyant", x, params={"script": "cluster"}))
    assert tr.min_granularity() == pytest.approx(1.0)
    times = np.arange(scn.n - 1, scn.horizon, 0.05)
    plies, exact = ply_series(replay(scn, tr, times), 1)
    assert exact and plies.max() <= x


def test_oblivious_window_refreshes_everyone_in_the_window():
    scn = fixtures.gen_reversal_fixture(5, 0.0)
    tr = run_scheme(scn, oblivious_window_config(scn, 5))
    tau, w = scn.target_time, scn.expectations["window"]
    assert tr.entities_in(tau - w, tau + 1e-9) == set(range(scn.n))
    assert tr.times[-1] == pytest.approx(tau)
    plies, _ = ply_series(replay(scn, tr, [tau]), 1)
    assert plies[0] <= 5


def test_unknown_script():
    with pytest.raises(SchemeError):
        run_scheme(fixtures.gen_grid(3), SchemeConfig("clairvoyant", 1, params={"script": "psychic"}))
