import json
import math

import numpy as np
import pytest

from kcirculant.montecarlo import (
    DEFAULT_MASTER_SEED,
    ExperimentConfig,
    HypothesisError,
    INPUT_LAWS,
    KIND_GUMBEL,
    KIND_LSD2,
    KIND_LSD3,
    KIND_LSD4,
    derive_trial_seed,
    hypothesis_check,
    input_law,
    oracle_sweep,
    run_gumbel_experiment,
    run_lsd_experiment,
)


class TestSeeding:
    def test_deterministic(self):
        assert derive_trial_seed(42, 7) == derive_trial_seed(42, 7)

    def test_distinct_streams(self):
        seeds = {derive_trial_seed(42, i) for i in range(1001)}
        assert len(seeds) == 1001

    def test_masters_decorrelate(self):
        a = [derive_trial_seed(1, i) for i in range(100)]
        b = [derive_trial_seed(2, i) for i in range(100)]
        assert not set(a) & set(b)


class TestInputLaws:
    def test_aliases(self):
        assert input_law("exp").name == "centered_exponential"
        assert input_law("normal").name == "gaussian"
        with pytest.raises(ValueError):
            input_law("cauchy")

    @pytest.mark.parametrize("name", sorted(INPUT_LAWS))
    def test_sample_moments(self, name):
        law = INPUT_LAWS[name]
        mean, var, m3 = law.moment_check
        assert (mean, var) == (0.0, 1.0)
        rng = np.random.default_rng(hash(name) % 2**32)
        x = law.sample(rng, 10**5)
        n = x.size
        assert abs(x.mean()) < 3.0 / math.sqrt(n)
        if name == "rademacher":
            assert np.all(x**2 == 1.0)
            assert x.var() == pytest.approx(1.0, abs=1e-4)  # 1 - mean^2
        else:
            m4 = ((x - x.mean()) ** 4).mean()
            assert abs(x.var() - 1.0) < 3.0 * math.sqrt(max(m4 - 1.0, 0.1) / n)
        sample_m3 = np.abs(x) ** 3
        band = max(4.0 * sample_m3.std() / math.sqrt(n), 1e-12)
        assert abs(sample_m3.mean() - m3) <= band


class TestHypothesisChecks:
    def test_minus_one_family(self):
        cfg = ExperimentConfig(kind=KIND_LSD3, k=10, n=101, trials=1)
        hyp = hypothesis_check(cfg)
        assert hyp["g"] == 2 and hyp["s"] == 1 and hyp["g1"] == 4
        assert hyp["g1_matches_expected"]

    def test_minus_one_rejects(self):
        cfg = ExperimentConfig(kind=KIND_LSD3, k=10, n=100, g=2, trials=1)
        with pytest.raises(HypothesisError):
            hypothesis_check(cfg)

    def test_plus_one_family(self):
        cfg = ExperimentConfig(kind=KIND_LSD4, k=100, n=9999, trials=1)
        hyp = hypothesis_check(cfg)
        assert hyp["g"] == 2 and hyp["s"] == 1 and hyp["g1"] == 2

    def test_plus_one_g1_needs_k1(self):
        cfg = ExperimentConfig(kind=KIND_LSD4, k=3, n=10, g=1, trials=1)
        with pytest.raises(HypothesisError):
            hypothesis_check(cfg)

    def test_degenerate_circle_needs_coprime(self):
        cfg = ExperimentConfig(kind=KIND_LSD2, k=2, n=10, trials=1)
        with pytest.raises(HypothesisError):
            hypothesis_check(cfg)

    def test_gumbel_family_shape(self):
        cfg = ExperimentConfig(kind=KIND_GUMBEL, k=20, n=401, trials=1)
        hyp = hypothesis_check(cfg)
        assert hyp["q"] == 100 and hyp["four_blocks"] == 100

    def test_gumbel_rejects_other_n(self):
        cfg = ExperimentConfig(kind=KIND_GUMBEL, k=20, n=400, trials=1)
        with pytest.raises(HypothesisError):
            hypothesis_check(cfg)


class TestLsdExperiments:
    def test_roots_law_small(self):
        cfg = ExperimentConfig(kind=KIND_LSD3, k=10, n=101, trials=3,
                               master_seed=5,
                               tolerances={"radial_ks_mean": 0.4})
        report = run_lsd_experiment(cfg)
        assert report.passed
        assert report.aggregates["angular_grid_dev_max"] < 1e-9
        for trial in report.trials:
            assert 0 <= trial["radial_ks"] <= 1

    def test_uniform_law_small(self):
        cfg = ExperimentConfig(kind=KIND_LSD4, k=10, n=99, trials=3,
                               master_seed=6, law="centered_exponential",
                               tolerances={"radial_ks_mean": 0.4,
                                           "angular_ks_mean": 0.4})
        report = run_lsd_experiment(cfg)
        assert report.passed
        assert set(report.trials[0]) == {"trial", "seed", "radial_ks", "angular_ks"}

    def test_degenerate_circle_small(self):
        cfg = ExperimentConfig(kind=KIND_LSD2, k=2, n=729, trials=2,
                               master_seed=7,
                               tolerances={"band_mass_min": 0.5, "epsilon": 0.1})
        report = run_lsd_experiment(cfg)
        assert report.passed
        assert all(0 <= t["band_mass"] <= 1 for t in report.trials)

    def test_radial_ks_shrinks_with_n(self):
        # seed-averaged distance should drop as the matched family grows
        def mean_ks(k, n):
            cfg = ExperimentConfig(kind=KIND_LSD3, k=k, n=n, trials=3,
                                   master_seed=11,
                                   tolerances={"radial_ks_mean": 1.0})
            return run_lsd_experiment(cfg).aggregates["radial_ks_mean"]

        assert mean_ks(100, 10001) < mean_ks(10, 101)

    def test_report_json_round_trips(self):
        cfg = ExperimentConfig(kind=KIND_LSD3, k=10, n=101, trials=2,
                               master_seed=8,
                               tolerances={"radial_ks_mean": 1.0})
        report = run_lsd_experiment(cfg)
        payload = json.loads(report.to_json())
        assert payload["config"]["k"] == 10
        assert payload["pass"] is True
        assert "wall_clock" not in json.dumps(payload)
        assert len(payload["trials"]) == 2


class TestGumbelExperiment:
    def test_small_run(self):
        cfg = ExperimentConfig(kind=KIND_GUMBEL, k=20, n=401, trials=40,
                               master_seed=9,
                               tolerances={"ks_gumbel": 0.6, "ks_reference": 0.6})
        report = run_gumbel_experiment(cfg)
        assert report.passed
        assert "ks_gumbel" in report.aggregates
        assert "ks_reference" in report.aggregates
        assert len(report.trials) == 40

    def test_single_trial_has_no_ks(self):
        cfg = ExperimentConfig(kind=KIND_GUMBEL, k=20, n=401, trials=1,
                               master_seed=10)
        report = run_gumbel_experiment(cfg)
        assert report.passed
        assert "ks_gumbel" not in report.aggregates
        assert "standardized" in report.trials[0]


class TestOracleSweep:
    def test_two_by_two_closed_form(self):
        report = oracle_sweep(2, 3, master_seed=1)
        assert report.passed
        assert report.aggregates["pairs"] == 1
        assert report.aggregates["max_distance"] < 1e-10

    def test_small_sweep_clean(self):
        report = oracle_sweep(12, 2, master_seed=2)
        assert report.passed
        assert report.aggregates["failures"] == 0
        gcd_pairs = [t for t in report.trials if t["zero_multiplicity"] > 0]
        assert gcd_pairs, "sweep must include gcd(k, n) > 1 cases"

    def test_fuzz_flags_failure(self):
        report = oracle_sweep(8, 1, master_seed=3, fuzz=1e-3)
        assert not report.passed
        assert report.aggregates["failures"] > 0

    def test_rejects_large(self):
        with pytest.raises(ValueError):
            oracle_sweep(129, 1, master_seed=0)


class TestReproducibility:
    def test_threaded_run_matches_serial(self, monkeypatch):
        cfg = dict(kind=KIND_LSD3, k=10, n=101, trials=6, master_seed=123,
                   tolerances={"radial_ks_mean": 1.0})
        monkeypatch.setenv("KCIRC_THREADS", "1")
        serial = run_lsd_experiment(ExperimentConfig(**cfg)).to_json()
        monkeypatch.setenv("KCIRC_THREADS", "4")
        threaded = run_lsd_experiment(ExperimentConfig(**cfg)).to_json()
        assert serial == threaded

    def test_gumbel_threaded_matches_serial(self, monkeypatch):
        cfg = dict(kind=KIND_GUMBEL, k=10, n=101, trials=8, master_seed=321,
                   tolerances={"ks_gumbel": 1.0, "ks_reference": 1.0})
        monkeypatch.setenv("KCIRC_THREADS", "1")
        serial = run_gumbel_experiment(ExperimentConfig(**cfg)).to_json()
        monkeypatch.setenv("KCIRC_THREADS", "3")
        threaded = run_gumbel_experiment(ExperimentConfig(**cfg)).to_json()
        assert serial == threaded

    def test_default_seed_is_stable(self):
        assert DEFAULT_MASTER_SEED == 20260811
