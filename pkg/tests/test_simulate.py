import numpy as np
import pytest

from spike_detect import simulate as sim
from spike_detect.detectors import glrt_threshold
from spike_detect.errors import DomainError
from spike_detect.spectrum import summarize


@pytest.fixture
def cfg():
    return sim.SimConfig(K=4, N=16, rho=2.0, trials=300, seed=5, alpha=0.1)


class TestConfig:
    @pytest.mark.parametrize(
        "kw",
        [
            {"K": 1, "N": 5},
            {"K": 5, "N": 5},
            {"K": 2, "N": 5, "trials": 0},
            {"K": 2, "N": 5, "sigma2": 0.0},
            {"K": 2, "N": 5, "rho": -1.0},
            {"K": 2, "N": 5, "channel_mode": "fixed"},
            {"K": 2, "N": 5, "seed": -1},
            {"K": 2, "N": 5, "alpha": 1.0},
        ],
    )
    def test_rejects(self, kw):
        with pytest.raises(DomainError):
            sim.SimConfig(**kw)


class TestGeneration:
    def test_deterministic(self, cfg):
        a, b = sim.gen_h1(cfg, 7), sim.gen_h1(cfg, 7)
        assert np.array_equal(a.entries, b.entries)
        assert not np.array_equal(sim.gen_h1(cfg, 8).entries, a.entries)

    def test_seed_changes_draws(self, cfg):
        other = sim.SimConfig(K=4, N=16, rho=2.0, trials=300, seed=6)
        assert not np.array_equal(sim.gen_h0(cfg, 0).entries, sim.gen_h0(other, 0).entries)

    def test_null_moments(self):
        cfg = sim.SimConfig(K=8, N=500, sigma2=2.5)
        y = np.stack([sim.gen_h0(cfg, i).entries for i in range(50)])
        n = y.size
        assert np.mean(y) == pytest.approx(0.0, abs=4 * np.sqrt(2.5 / n))
        assert np.mean(np.abs(y) ** 2) == pytest.approx(2.5, abs=4 * 2.5 / np.sqrt(n))
        assert np.mean(y.real**2) == pytest.approx(1.25, abs=4 * 1.25 * np.sqrt(2 / n))
        assert abs(np.mean(y**2)) < 4 * 2.5 / np.sqrt(n)

    def test_alternative_covariance(self):
        cfg = sim.SimConfig(K=3, N=400, sigma2=1.5, rho=4.0)
        y = np.concatenate([sim.gen_h1(cfg, i).entries for i in range(100)], axis=1)
        r = y @ y.conj().T / y.shape[1]
        want = 1.5 * np.eye(3)
        want[0, 0] += 4.0 * 1.5
        assert np.max(np.abs(r - want)) < 0.1

    def test_zero_snr_matches_null(self):
        cfg = sim.SimConfig(K=3, N=8, rho=0.0)
        assert np.array_equal(sim.gen_h1(cfg, 3).entries, sim.gen_h0(cfg, 3).entries)

    @pytest.mark.parametrize("mode", sim.CHANNEL_MODES)
    def test_channel_norm(self, mode):
        cfg = sim.SimConfig(K=6, N=10, sigma2=2.0, rho=3.0, channel_mode=mode)
        for i in range(5):
            assert np.linalg.norm(sim.channel_vector(cfg, i)) ** 2 == pytest.approx(6.0, rel=1e-13)

    def test_isotropic_channel_varies(self):
        cfg = sim.SimConfig(K=6, N=10, rho=3.0, channel_mode="random_isotropic")
        assert not np.allclose(sim.channel_vector(cfg, 0), sim.channel_vector(cfg, 1))

    def test_noise_shared_between_hypotheses(self, cfg):
        h = sim.channel_vector(cfg, 2)
        diff = sim.gen_h1(cfg, 2).entries - sim.gen_h0(cfg, 2).entries
        assert np.linalg.matrix_rank(diff, tol=1e-10) == 1
        assert np.allclose(diff[1:], 0) and np.abs(h[0]) > 0


class TestSpectra:
    def test_matches_single_trial_pipeline(self, cfg):
        e = sim.spectra(cfg, "h1")
        for i in (0, 17, 299):
            assert np.allclose(e[i], summarize(sim.gen_h1(cfg, i)).eigenvalues, rtol=1e-12, atol=0)

    def test_batches_do_not_matter(self, cfg, monkeypatch):
        whole = sim.spectra(cfg, "h0")
        monkeypatch.setattr(sim, "_BATCH_ENTRIES", 64 * 7)
        assert np.array_equal(sim.spectra(cfg, "h0"), whole)

    def test_prefix_stable(self, cfg):
        short = sim.SimConfig(K=4, N=16, rho=2.0, trials=40, seed=5)
        assert np.array_equal(sim.spectra(short, "h1"), sim.spectra(cfg, "h1")[:40])

    def test_unknown_hypothesis(self, cfg):
        with pytest.raises(DomainError):
            sim.spectra(cfg, "h2")


class TestPfa:
    def test_median_threshold(self):
        cfg = sim.SimConfig(K=4, N=16, trials=2000, seed=1)
        t, _ = sim._t_u(sim.spectra(cfg, "h0"))
        e = sim.empirical_pfa(cfg, threshold=float(np.median(t)))
        assert e.pfa == pytest.approx(0.5, abs=1e-3)

    def test_infinite_threshold(self, cfg):
        e = sim.empirical_pfa(cfg, threshold=np.inf)
        assert e.rejections == 0 and e.ci_low == 0.0 and e.ci_high > 0

    def test_default_threshold(self, cfg):
        e = sim.empirical_pfa(cfg)
        assert e.threshold == glrt_threshold(4, 16, 0.1)
        assert e.ci_low <= e.pfa <= e.ci_high and e.trials == 300

    def test_wilson_interval(self):
        lo, hi = sim._wilson(10, 100)
        assert (lo, hi) == pytest.approx((0.05522914, 0.17436566), abs=1e-7)

    def test_needs_level(self):
        with pytest.raises(DomainError):
            sim.empirical_pfa(sim.SimConfig(K=2, N=5))


class TestRoc:
    def test_endpoints_and_order(self, cfg):
        for curve in sim.roc_curves(cfg):
            pts = curve.points
            assert pts[0] == (0.0, 0.0) and pts[-1] == (1.0, 1.0)
            assert np.all(np.diff(curve.pfa) >= 0) and np.all(np.diff(curve.power) >= 0)
            assert curve.trials_h0 == curve.trials_h1 == 300

    def test_kinds(self, cfg):
        assert [c.test_kind for c in sim.roc_curves(cfg)] == ["glrt", "condition"]

    def test_paired_draws(self, cfg):
        s = sim.paired_statistics(cfg)
        e0 = sim.spectra(cfg, "h0")
        assert np.array_equal(s.t_h0, e0[:, 0] / e0.mean(axis=1))
        assert np.array_equal(s.u_h0, e0[:, 0] / e0[:, -1])
        curves = sim.roc_curves(cfg, stats_=s)
        assert np.array_equal(curves[0].pfa, sim.roc_curves(cfg)[0].pfa)

    def test_custom_grid(self, cfg):
        t, u = sim.roc_curves(cfg, threshold_grid=([1.5, 2.0], [3.0]))
        assert t.thresholds.tolist() == [2.0, 1.5] and u.thresholds.tolist() == [3.0]

    def test_invalid_curve(self):
        with pytest.raises(ValueError):
            sim.RocCurve("glrt", np.array([2.0, 1.0]), np.array([0.5, 0.1]), np.array([0.5, 0.6]), 10, 10)

    def test_compare_bookkeeping(self, cfg):
        s = sim.paired_statistics(cfg)
        m = sim.compare_at_levels(s, [0.1, 0.5])
        assert np.allclose(m.difference, m.power_glrt - m.power_cond)
        assert np.all(m.paired_se >= 0)

    def test_identical_statistics_have_zero_difference(self, cfg):
        s = sim.paired_statistics(cfg)
        same = sim.PairedStatistics(s.t_h0, s.t_h0, s.t_h1, s.t_h1)
        m = sim.compare_at_levels(same, [0.05, 0.2])
        assert np.all(m.difference == 0) and np.all(m.paired_se == 0)


class TestFluctuations:
    def test_tracy_widom_at_scale(self):
        cfg = sim.SimConfig(K=100, N=400, trials=4000, seed=1)
        assert sim.tw_fluctuation_check(cfg) < 0.05

    def test_distance_shrinks_with_size(self):
        d = [sim.tw_fluctuation_check(sim.SimConfig(K=k, N=4 * k, trials=20000, seed=1)) for k in (4, 8, 16)]
        assert d[0] > d[1] > d[2]

    def test_negative_control(self):
        cfg = sim.SimConfig(K=20, N=100, rho=10.0, trials=500, seed=1)
        assert sim.tw_fluctuation_check(cfg, "h1") > 0.3

    def test_variance_does_not_matter(self):
        a = sim.tw_fluctuation_check(sim.SimConfig(K=8, N=32, trials=500, seed=2))
        b = sim.tw_fluctuation_check(sim.SimConfig(K=8, N=32, sigma2=7.0, trials=500, seed=2))
        assert a == pytest.approx(b, abs=1e-12)

    def test_spiked_limit(self):
        cfg = sim.SimConfig(K=50, N=250, rho=10.0, trials=50, seed=3)
        assert sim.mean_top_eigenvalue(cfg) == pytest.approx(11.22, rel=0.03)
