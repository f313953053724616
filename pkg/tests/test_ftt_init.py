import numpy as np
import pytest

from cpquery import fixtures
from cpquery.geometry import x_separations
from cpquery.harness.simulate import degree_series, ply_series, replay
from cpquery.motion import Scenario, Trajectory, configuration_at
from cpquery.schemes import SchemeConfig, SchemeError, run_ftt, run_init


def spread_line(n, gap=50.0):
    trajs = [Trajectory.stationary([k * gap]) for k in range(n)]
    return Scenario(dim=1, rho=0.5, trajectories=trajs, horizon=20.0, target_time=10.0)


class TestFTT:
    def test_well_separated_needs_one_round(self):
        scn = spread_line(8)
        tr = run_ftt(scn, SchemeConfig("ftt", 4, target_time=10.0))
        assert len(tr) == 8
        assert tr.min_granularity() == pytest.approx(10.0 / 16)
        assert len(tr.meta["rounds"]) == 1

    def test_few_entities_are_trivially_safe(self):
        scn = Scenario(dim=1, rho=0.0, trajectories=[Trajectory.stationary([0.0]), Trajectory.stationary([0.1])],
                       horizon=2.0, enforce_disjoint=False)
        tr = run_ftt(scn, SchemeConfig("ftt", 4, target_time=1.0))
        assert len(tr) == 2 and tr.feasible

    @pytest.mark.parametrize("x,beta", [(5, 0.0), (5, 0.2), (7, 0.0)])
    def test_reversal_fixture_degree_at_target(self, x, beta):
        scn = fixtures.gen_reversal_fixture(x, beta)
        cfg = SchemeConfig("ftt", x, beta=beta, target_time=scn.target_time)
        tr = run_ftt(scn, cfg)
        assert tr.feasible
        deg = degree_series(replay(scn, tr, [scn.target_time]))[0]
        assert deg <= cfg.bound
        first = tr.meta["rounds"][0]["granularity"]
        assert first == pytest.approx(scn.target_time / (2 * scn.n))
        # later rounds never drop below a constant fraction of the first
        assert min(r["granularity"] for r in tr.meta["rounds"]) >= first / 16

    def test_ply_variant_keeps_no_safe_survivors(self):
        scn = fixtures.gen_reversal_fixture(5, 0.0)
        cfg = SchemeConfig("ftt", 5, target_time=scn.target_time, params={"measure": "ply"})
        tr = run_ftt(scn, cfg)
        assert tr.feasible
        assert all(r["kept_safe"] == 0 for r in tr.meta["rounds"])
        plies, _ = ply_series(replay(scn, tr, [scn.target_time]), 1)
        assert plies[0] <= 5

    def test_needs_a_target(self):
        with pytest.raises(SchemeError):
            run_ftt(fixtures.gen_grid(3), SchemeConfig("ftt", 1))


class TestInit:
    def test_well_separated_certifies_quickly(self):
        scn = fixtures.gen_random(2, 12, 2, 0.02, horizon=200.0)
        tr, st = run_init(scn, SchemeConfig("init", 8), t0=100.0)
        assert tr.feasible
        assert tr.meta["certified"] and tr.meta["init_bound_ok"]
        # a stationary entity queried in round s has wait at most the round's
        # start-to-t0 time, so it is super-safe once a * b**s * t0 plus two
        # such waits fits inside its separation
        sig = float(x_separations(configuration_at(scn, 0.0), 8).min())
        a = tr.meta["a"]
        s_max = int(np.ceil(np.log((a + 2 * 16 / 15) * 100.0 / sig) / np.log(16 / 15)))
        assert len(tr.meta["rounds"]) <= s_max + 1
        assert st.all_queried

    def test_mobile_scene_certifies_and_bound_holds(self):
        scn = fixtures.gen_random(6, 12, 2, 0.01, mobile=True, wander=2.0, horizon=400.0)
        t0 = 300.0
        tr, st = run_init(scn, SchemeConfig("init", 8), t0=t0)
        assert tr.meta["certified"]
        a = tr.meta["a"]
        tilde = np.array(tr.meta["sigma_tilde_t0"])
        true = x_separations(configuration_at(scn, t0), 8)
        assert np.all(tilde <= (16 * a / 15 + 5) / a * true * (1 + 1e-9))
        assert np.all(true / 2 <= tilde * (1 + 1e-9)) and np.all(tilde <= 1.5 * true * (1 + 1e-9))

    def test_coincident_entities_are_infeasible(self):
        trajs = [Trajectory.stationary([0.0, 0.0]) for _ in range(10)]
        scn = Scenario(dim=2, rho=0.0, trajectories=trajs, horizon=10.0, enforce_disjoint=False)
        tr, _ = run_init(scn, SchemeConfig("init", 8), t0=5.0)
        assert not tr.feasible
        assert tr.warnings

    def test_rejects_small_a(self):
        scn = spread_line(6)
        with pytest.raises(SchemeError):
            run_init(scn, SchemeConfig("init", 4), t0=5.0, a=1.0)
