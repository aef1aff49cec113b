import io
import math

import numpy as np
import pytest

from ghzdet import detector as det
from ghzdet import montecarlo as mc
from ghzdet.detector import DetectorParams
from ghzdet.montecarlo import RunConfig, TrialOutcome, compare_analytic, run, simulate_trial

SCALED = DetectorParams(0.5, 1e-2, 0.99, 0.01)


def scaled_config(**overrides):
    kwargs = dict(params=SCALED, setting="XYY", n_trials=1_000_000, master_seed=42)
    kwargs.update(overrides)
    return RunConfig(**kwargs)


class TestConfig:
    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            scaled_config(n_trials=0)
        with pytest.raises(ValueError):
            scaled_config(master_seed=-1)
        with pytest.raises(ValueError):
            scaled_config(setting="XZZ")
        with pytest.raises(ValueError):
            scaled_config(arrival_weights=(0.0,) * 10)
        with pytest.raises(ValueError):
            scaled_config(arrival_weights=(1.0,) * 9)


class TestSimulateTrial:
    def test_perfect_twopair_is_always_ghz(self):
        cfg = scaled_config(params=DetectorParams(1.0, 0.0, 0.0, 1.0), setting="XXX")
        rng = np.random.default_rng(0)
        for _ in range(50):
            out = simulate_trial(cfg, rng)
            assert out.creation == "twopair"
            assert out.classified_ghz
            assert out.fired == (True, True, True, True)
            assert out.product == -1

    def test_pair_without_darks_never_fourfolds(self):
        cfg = scaled_config(params=DetectorParams(0.9, 0.0, 1.0, 0.0))
        rng = np.random.default_rng(1)
        for _ in range(200):
            out = simulate_trial(cfg, rng)
            assert out.creation == "pair"
            assert out.product is None
            assert not all(out.fired)

    def test_all_dark_limit(self):
        cfg = scaled_config(params=DetectorParams(0.0, 1.0, 0.5, 0.5))
        rng = np.random.default_rng(2)
        products = [simulate_trial(cfg, rng).product for _ in range(2000)]
        assert all(p is not None for p in products)
        assert abs(np.mean(products)) < 3 / math.sqrt(len(products))

    def test_outcome_invariant_enforced(self):
        with pytest.raises(ValueError):
            TrialOutcome(
                creation="pair",
                arrival="TD1",
                fired=(True, True, True, False),
                dark_flags=(False,) * 4,
                classified_ghz=False,
                product=1,
            )


class TestRun:
    def test_deterministic_for_fixed_seed(self):
        a = run(scaled_config(n_trials=200_000))
        b = run(scaled_config(n_trials=200_000))
        assert a == b

    def test_independent_of_worker_count(self):
        base = scaled_config(n_trials=400_000, chunk_size=100_000)
        serial = run(base)
        parallel = run(scaled_config(n_trials=400_000, chunk_size=100_000, n_workers=4))
        assert serial == parallel

    def test_seed_changes_results(self):
        a = run(scaled_config(n_trials=200_000, master_seed=1))
        b = run(scaled_config(n_trials=200_000, master_seed=2))
        assert a != b

    def test_perfect_twopair_exact(self):
        cfg = scaled_config(
            params=DetectorParams(1.0, 0.0, 0.0, 1.0), setting="XXX", n_trials=1000
        )
        stats = run(cfg)
        assert stats.n_fourfold == 1000
        assert stats.n_ghz_fourfold == 1000
        assert stats.e_hat == -1.0
        assert stats.std_err == 0.0

    def test_no_coincidences_is_explicit(self):
        cfg = scaled_config(params=DetectorParams(0.9, 0.0, 1.0, 0.0), n_trials=5000)
        stats = run(cfg)
        assert stats.no_coincidences
        assert stats.e_hat is None
        assert stats.std_err is None
        assert stats.p4_hat == 0.0

    def test_scaled_regime_matches_analytic(self):
        stats = run(scaled_config(n_trials=2_000_000))
        analytic = det.corrected_correlation(SCALED, mode="exact")
        assert abs(stats.e_hat - analytic) <= 3 * stats.std_err
        p4 = det.fourfold_probability(SCALED)
        se = math.sqrt(p4 * (1 - p4) / stats.n_trials)
        assert abs(stats.p4_hat - p4) <= 3 * se

    def test_conditioning_counts_only_fourfolds(self):
        stats = run(scaled_config(n_trials=500_000))
        assert stats.n_ghz_fourfold <= stats.n_fourfold <= stats.n_trials
        assert 0 < stats.n_fourfold < stats.n_trials

    def test_convergence_rate(self):
        analytic = det.corrected_correlation(SCALED, mode="exact")
        errors = []
        for n in (100_000, 1_000_000, 10_000_000):
            runs = [
                abs(run(scaled_config(n_trials=n, master_seed=seed)).e_hat - analytic)
                for seed in (101, 102, 103)
            ]
            errors.append(float(np.median(runs)))
        assert errors[0] > errors[1] > errors[2]

    def test_ghz_subset_purity(self):
        # Among classified-GHZ fourfolds under an aligned setting the product
        # is +1 every time, so e_hat is bounded below by the GHZ fraction.
        stats = run(scaled_config(n_trials=2_000_000, setting="XYY"))
        ghz_fraction = stats.n_ghz_fourfold / stats.n_fourfold
        # uncorrelated fourfolds average to zero, so e_hat ~= ghz_fraction
        assert stats.e_hat == pytest.approx(ghz_fraction, abs=4 * stats.std_err)


class TestEventLog:
    def test_log_lines_and_tallies_agree(self):
        cfg = scaled_config(
            params=DetectorParams(0.5, 0.05, 0.5, 0.5), n_trials=2000, chunk_size=500
        )
        stream = io.StringIO()
        stats = run(cfg, event_stream=stream)
        lines = stream.getvalue().splitlines()
        assert len(lines) == cfg.n_trials
        fourfolds = [ln for ln in lines if ln.split(",")[2] == "1111"]
        assert len(fourfolds) == stats.n_fourfold
        ghz = [ln for ln in fourfolds if ln.split(",")[4] == "ghz"]
        assert len(ghz) == stats.n_ghz_fourfold

    def test_log_is_deterministic(self):
        cfg = scaled_config(params=DetectorParams(0.5, 0.05, 0.5, 0.5), n_trials=500)
        a, b = io.StringIO(), io.StringIO()
        run(cfg, event_stream=a)
        run(cfg, event_stream=b)
        assert a.getvalue() == b.getvalue()

    def test_scalar_path_statistics_match_analytic(self):
        # The per-trial path must agree with the closed-form model as well.
        params = DetectorParams(0.5, 0.05, 0.6, 0.4)
        cfg = scaled_config(params=params, n_trials=40_000, chunk_size=10_000)
        stream = io.StringIO()
        stats = run(cfg, event_stream=stream)
        p4 = det.fourfold_probability(params)
        se = math.sqrt(p4 * (1 - p4) / cfg.n_trials)
        assert abs(stats.p4_hat - p4) <= 4 * se


class TestCompareAnalytic:
    def test_matched_config_unflagged(self):
        stats = run(scaled_config(n_trials=2_000_000))
        report = compare_analytic(stats, SCALED, "XYY")
        assert report.comparable
        assert abs(report.z_correlation) <= 4
        assert abs(report.z_fourfold) <= 4
        assert not report.flagged

    def test_mismatched_gamma_flagged(self):
        stats = run(scaled_config(n_trials=2_000_000))
        wrong = DetectorParams(0.5, 1e-1, 0.99, 0.01)
        report = compare_analytic(stats, wrong, "XYY")
        assert report.flagged

    def test_zero_fourfold_not_comparable(self):
        cfg = scaled_config(params=DetectorParams(0.9, 0.0, 1.0, 0.0), n_trials=1000)
        report = compare_analytic(run(cfg), cfg.params, "XYY")
        assert not report.comparable
        assert report.z_correlation is None

    def test_sign_follows_setting(self):
        cfg = scaled_config(setting="XXX", n_trials=2_000_000)
        stats = run(cfg)
        report = compare_analytic(stats, SCALED, "XXX")
        assert report.analytic_e < 0
        assert stats.e_hat < 0
        assert not report.flagged
