import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn.isotonic import IsotonicRegression

from symptomnet.pipeline import (
    ABSENT,
    PRESENT,
    UNDEFINED,
    BaggedCalibrator,
    PipelineError,
    QuartileBinner,
    apply_bins,
    binarize_symptom,
    calibrate,
    condition_target,
    dsm_targets,
    fit_calibrator,
    fit_quartile_bins,
    load_binner,
    load_calibrators,
    pav_fit,
    save_binner,
    save_calibrators,
)


class TestQuartileBins:
    def test_one_to_eight(self):
        # hand evaluation of linear interpolation between order statistics
        assert fit_quartile_bins(range(1, 9)) == (2.75, 4.5, 6.25)

    def test_constant_input_warns_and_bins_low(self):
        with pytest.warns(UserWarning, match="degenerate"):
            bounds = fit_quartile_bins([3.0, 3.0, 3.0, 3.0])
        assert bounds == (3.0, 3.0, 3.0)
        assert apply_bins(3.0, bounds) == 0
        assert apply_bins(3.1, bounds) == 3

    def test_uniform_sample_boundaries(self):
        rng = np.random.default_rng(0)
        bounds = fit_quartile_bins(rng.random(10000))
        assert np.allclose(bounds, (0.25, 0.5, 0.75), atol=0.02)

    def test_too_few_values(self):
        with pytest.raises(PipelineError):
            fit_quartile_bins([1.0, 2.0, 3.0])

    def test_non_finite_rejected(self):
        with pytest.raises(PipelineError):
            fit_quartile_bins([1.0, 2.0, np.nan, 4.0])
        with pytest.raises(PipelineError):
            apply_bins(float("inf"), (0.0, 1.0, 2.0))

    def test_boundary_belongs_to_lower_bin(self):
        bounds = (1.0, 2.0, 3.0)
        assert apply_bins(1.0, bounds) == 0
        assert apply_bins(2.0, bounds) == 1
        assert apply_bins(3.0, bounds) == 2
        assert apply_bins(0.5, bounds) == 0
        assert apply_bins(99.0, bounds) == 3

    def test_training_sample_bins_near_quarter_shares(self):
        rng = np.random.default_rng(1)
        values = rng.normal(size=10000)
        binner = QuartileBinner(boundaries={})
        binner.fit("s", values)
        bins = binner.transform("s", values)
        shares = np.bincount(bins, minlength=4) / len(values)
        assert np.all(np.abs(shares - 0.25) <= 0.02)

    def test_transform_matches_scalar_path(self):
        rng = np.random.default_rng(2)
        values = rng.normal(size=500)
        binner = QuartileBinner(boundaries={})
        binner.fit("s", values)
        probe = np.concatenate([values[:100], np.asarray(binner.boundaries["s"])])
        vector = binner.transform("s", probe)
        scalar = [apply_bins(float(v), binner.boundaries["s"]) for v in probe]
        assert np.array_equal(vector, scalar)

    def test_round_trip(self, tmp_path):
        binner = QuartileBinner(boundaries={"a": (0.1, 0.2, 0.3)})
        save_binner(binner, tmp_path / "bins.json")
        again = load_binner(tmp_path / "bins.json")
        assert again.boundaries == binner.boundaries
        save_binner(again, tmp_path / "bins2.json")
        assert (tmp_path / "bins.json").read_bytes() == (tmp_path / "bins2.json").read_bytes()


class TestTargets:
    def test_binarize(self):
        assert binarize_symptom(2) == PRESENT
        assert binarize_symptom(3) == PRESENT
        assert binarize_symptom(1) == ABSENT
        assert binarize_symptom(0) == ABSENT
        with pytest.raises(PipelineError):
            binarize_symptom(4)

    def test_condition_target_cases(self):
        assert condition_target(12, True) == PRESENT
        assert condition_target(5, False) == ABSENT
        assert condition_target(12, False) == UNDEFINED
        assert condition_target(5, True) == UNDEFINED
        assert condition_target(9, None) == UNDEFINED

    def test_condition_target_exhaustive_partition(self):
        for total in range(0, 25):
            for diagnosis in (True, False, None):
                assert condition_target(total, diagnosis) in (PRESENT, ABSENT, UNDEFINED)

    def test_condition_target_range(self):
        with pytest.raises(PipelineError):
            condition_target(25, True)
        with pytest.raises(PipelineError):
            condition_target(-1, False)

    def test_all_items_max(self):
        out = dsm_targets([3] * 8, [3] * 7)
        assert out == {"mdd": True, "other_depression": True, "gad": True}

    def test_somatic_only_depression(self):
        # 5 present symptoms, none of them anhedonia or low mood
        dep = [0, 0, 3, 3, 3, 3, 3, 0]
        out = dsm_targets(dep, [0] * 7)
        assert out["mdd"] is False
        assert out["other_depression"] is True

    def test_against_independent_rule_oracle(self):
        rng = np.random.default_rng(3)

        def oracle(dep, anx):
            dp = [v >= 2 for v in dep]
            ap = [v >= 2 for v in anx]
            return {
                "mdd": sum(dp) >= 5 and (dp[0] or dp[1]),
                "other_depression": sum(dp) >= 4,
                "gad": sum(ap) >= 5 and (ap[0] or ap[1]),
            }

        for _ in range(300):
            dep = rng.integers(0, 4, 8).tolist()
            anx = rng.integers(0, 4, 7).tolist()
            assert dsm_targets(dep, anx) == oracle(dep, anx)

    def test_item_range_checked(self):
        with pytest.raises(PipelineError):
            dsm_targets([4] + [0] * 7, [0] * 7)


class TestPav:
    def test_hand_trace(self):
        kx, ky = pav_fit([0.1, 0.2, 0.3], [0, 1, 0])
        assert np.allclose(kx, [0.1, 0.2, 0.3])
        assert np.allclose(ky, [0.0, 0.5, 0.5])

    def test_monotone_input_unchanged(self):
        kx, ky = pav_fit([1, 2, 3, 4], [0.1, 0.2, 0.3, 0.9])
        assert np.allclose(ky, [0.1, 0.2, 0.3, 0.9])

    def test_matches_sklearn_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(30):
            n = int(rng.integers(5, 60))
            x = rng.random(n)
            y = (rng.random(n) < x).astype(float)
            kx, ky = pav_fit(x, y)
            iso = IsotonicRegression(out_of_bounds="clip").fit(x, y)
            assert np.allclose(ky, iso.predict(kx), atol=1e-9)

    def test_fitted_values_nondecreasing(self):
        rng = np.random.default_rng(5)
        x = rng.random(200)
        y = rng.random(200)
        _, ky = pav_fit(x, y)
        assert np.all(np.diff(ky) >= -1e-12)


class TestCalibrator:
    def test_single_class_rejected(self):
        with pytest.raises(PipelineError):
            fit_calibrator([0.1, 0.9], [1, 1])

    def test_all_label_one_after_mixed_check(self):
        # near-degenerate but two-class input; output clamps into [0, 1]
        cal = fit_calibrator([0.0, 1.0, 1.0, 1.0], [0, 1, 1, 1], n_bags=5, seed=1)
        assert 0.0 <= cal.predict_one(0.5) <= 1.0
        assert cal.predict_one(1.0) == pytest.approx(1.0)

    def test_identity_on_calibrated_data(self):
        rng = np.random.default_rng(6)
        scores = rng.random(4000)
        labels = (rng.random(4000) < scores).astype(int)
        cal = fit_calibrator(scores, labels, seed=2)
        probe = np.linspace(0.05, 0.95, 10)
        assert np.all(np.abs(cal.predict(probe) - probe) < 0.05)

    def test_clamp_below_and_above_knots(self):
        cal = fit_calibrator([0.4, 0.5, 0.6, 0.7], [0, 0, 1, 1], n_bags=3, seed=3)
        assert calibrate(cal, -5.0) == cal.predict_one(0.0)
        assert calibrate(cal, 5.0) == cal.predict_one(1.0)

    def test_non_finite_score_rejected(self):
        cal = fit_calibrator([0.1, 0.9], [0, 1], n_bags=2, seed=4)
        with pytest.raises(PipelineError):
            calibrate(cal, float("nan"))

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.floats(min_value=0, max_value=1), min_size=2, max_size=20))
    def test_globally_nondecreasing(self, probes):
        cal = _shared_calibrator()
        out = cal.predict(np.sort(np.asarray(probes)))
        assert np.all(np.diff(out) >= -1e-12)

    def test_score_range_checked(self):
        with pytest.raises(PipelineError):
            fit_calibrator([0.2, 1.4], [0, 1])

    def test_auc_preserved_up_to_ties(self):
        from symptomnet.metrics import ScoredSet, roc_auc

        rng = np.random.default_rng(8)
        scores = rng.random(3000)
        labels = (rng.random(3000) < scores**1.7).astype(int)
        cal = fit_calibrator(scores, labels, seed=9)
        before = roc_auc(ScoredSet(scores, labels))
        after = roc_auc(ScoredSet(cal.predict(scores), labels))
        assert after >= before - 0.005

    def test_serialization_round_trip_bit_exact(self, tmp_path):
        cal = fit_calibrator(
            np.linspace(0, 1, 50), (np.linspace(0, 1, 50) > 0.4).astype(int), seed=10
        )
        save_calibrators({"Depression": cal}, tmp_path / "cal.json")
        loaded = load_calibrators(tmp_path / "cal.json")
        save_calibrators(loaded, tmp_path / "cal2.json")
        assert (tmp_path / "cal.json").read_bytes() == (tmp_path / "cal2.json").read_bytes()
        probe = np.linspace(0, 1, 33)
        assert np.array_equal(loaded["Depression"].predict(probe), cal.predict(probe))

    def test_determinism_same_seed(self):
        scores = np.linspace(0, 1, 200)
        labels = (scores > 0.5).astype(int)
        a = fit_calibrator(scores, labels, seed=11)
        b = fit_calibrator(scores, labels, seed=11)
        probe = np.linspace(0, 1, 17)
        assert np.array_equal(a.predict(probe), b.predict(probe))


_CAL_CACHE = {}


def _shared_calibrator() -> BaggedCalibrator:
    if "cal" not in _CAL_CACHE:
        rng = np.random.default_rng(7)
        scores = rng.random(1000)
        labels = (rng.random(1000) < scores).astype(int)
        _CAL_CACHE["cal"] = fit_calibrator(scores, labels, seed=7)
    return _CAL_CACHE["cal"]
