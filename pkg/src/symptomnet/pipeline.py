"""Glue between raw scores and the network: binning, targets, calibration.

Quartile boundaries are the 25/50/75% empirical quantiles with linear
interpolation between order statistics; boundary ties bin downward. The
calibrator is a bag of pool-adjacent-violators isotonic fits on seeded
bootstrap resamples, predicting the bag mean with linear interpolation
between knots and clamping beyond the training range.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

PRESENT = "present"
ABSENT = "absent"
UNDEFINED = "undefined"


class PipelineError(ValueError):
    pass


# --- discretization ----------------------------------------------------------

def fit_quartile_bins(values) -> tuple[float, float, float]:
    """Quartile cut boundaries (b1, b2, b3) from observed raw scores."""
    arr = np.asarray(values, dtype=float)
    if arr.size < 4:
        raise PipelineError("need at least 4 values to fit quartile bins")
    if not np.all(np.isfinite(arr)):
        raise PipelineError("non-finite value in quartile fit input")
    b1, b2, b3 = np.quantile(arr, [0.25, 0.5, 0.75], method="linear")
    if b1 == b3:
        warnings.warn("degenerate (constant) score distribution; all values bin to q0")
    return float(b1), float(b2), float(b3)


def apply_bins(value: float, boundaries: tuple[float, float, float]) -> int:
    """Quartile index 0..3; boundaries belong to the lower bin."""
    if not math.isfinite(value):
        raise PipelineError(f"cannot bin non-finite value {value!r}")
    b1, b2, b3 = boundaries
    if value <= b1:
        return 0
    if value <= b2:
        return 1
    if value <= b3:
        return 2
    return 3


@dataclass
class QuartileBinner:
    """Per-surrogate quartile boundaries fitted on development scores."""

    boundaries: dict[str, tuple[float, float, float]]

    def fit(self, name: str, values):
        self.boundaries[name] = fit_quartile_bins(values)

    def transform(self, name: str, values) -> np.ndarray:
        arr = np.asarray(values, dtype=float)
        if not np.all(np.isfinite(arr)):
            raise PipelineError("non-finite value in bin input")
        # searchsorted(left) reproduces apply_bins: boundaries bin downward
        return np.searchsorted(np.asarray(self.boundaries[name]), arr, side="left").astype(np.int64)

    def to_dict(self) -> dict:
        return {"boundaries": {k: list(v) for k, v in self.boundaries.items()}}

    @classmethod
    def from_dict(cls, payload: dict) -> "QuartileBinner":
        return cls({k: tuple(v) for k, v in payload["boundaries"].items()})


def save_binner(binner: QuartileBinner, path: str | Path):
    Path(path).write_text(json.dumps(binner.to_dict(), indent=1) + "\n")


def load_binner(path: str | Path) -> QuartileBinner:
    return QuartileBinner.from_dict(json.loads(Path(path).read_text()))


# --- target definitions ------------------------------------------------------

def binarize_symptom(item_score: int) -> str:
    """Symptom counted present when experienced on half or more days (>= 2)."""
    if item_score not in (0, 1, 2, 3):
        raise PipelineError(f"item score {item_score!r} outside 0..3")
    return PRESENT if item_score >= 2 else ABSENT


def condition_target(total: float, diagnosis) -> str:
    """Compound condition label from questionnaire total and diagnosis flag.

    Present needs total >= 10 plus a reported diagnosis; absent needs
    total < 10 and no diagnosis; everything else is undefined and excluded
    from metric denominators.
    """
    if not 0 <= total <= 24:
        raise PipelineError(f"total {total!r} outside scale range")
    if diagnosis is True and total >= 10:
        return PRESENT
    if diagnosis is False and total < 10:
        return ABSENT
    return UNDEFINED


def dsm_targets(depression_items, anxiety_items) -> dict[str, bool]:
    """DSM-like diagnostic rules from the 8 + 7 item severity scores."""
    dep = [int(v) for v in depression_items]
    anx = [int(v) for v in anxiety_items]
    if len(dep) != 8 or len(anx) != 7:
        raise PipelineError("expected 8 depression and 7 anxiety item scores")
    for v in dep + anx:
        if v not in (0, 1, 2, 3):
            raise PipelineError(f"item score {v!r} outside 0..3")
    dep_present = [v >= 2 for v in dep]
    anx_present = [v >= 2 for v in anx]
    # item order follows model.DEPRESSION_SYMPTOMS / ANXIETY_SYMPTOMS:
    # core depression items are anhedonia (0) and low mood (1); core anxiety
    # items are nervousness (0) and uncontrollable worry (1).
    core_dep = dep_present[0] or dep_present[1]
    core_anx = anx_present[0] or anx_present[1]
    return {
        "mdd": sum(dep_present) >= 5 and core_dep,
        "other_depression": sum(dep_present) >= 4,
        "gad": sum(anx_present) >= 5 and core_anx,
    }


# --- isotonic calibration ----------------------------------------------------

def pav_fit(x, y, sample_weight=None) -> tuple[np.ndarray, np.ndarray]:
    """Pool-adjacent-violators fit; returns (unique x knots, fitted values)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.ones_like(y) if sample_weight is None else np.asarray(sample_weight, dtype=float)
    order = np.argsort(x, kind="stable")
    x, y, w = x[order], y[order], w[order]

    # average duplicate x positions; isotonic fit must be a function of x
    ux, start = np.unique(x, return_index=True)
    sums = np.add.reduceat(y * w, start)
    weights = np.add.reduceat(w, start)
    means = sums / weights

    # pooled blocks as (value, weight, count) with violator merging
    values: list[float] = []
    wsum: list[float] = []
    count: list[int] = []
    for v, wt in zip(means, weights):
        values.append(v)
        wsum.append(wt)
        count.append(1)
        while len(values) > 1 and values[-2] > values[-1]:
            total = wsum[-2] + wsum[-1]
            merged = (values[-2] * wsum[-2] + values[-1] * wsum[-1]) / total
            values[-2:] = [merged]
            wsum[-2:] = [total]
            count[-2:] = [count[-2] + count[-1]]
    fitted = np.repeat(values, count)
    return ux, fitted


@dataclass
class IsotonicMap:
    """Monotone score -> probability map: linear between knots, clamped outside."""

    knots_x: np.ndarray
    knots_y: np.ndarray

    def predict(self, scores) -> np.ndarray:
        scores = np.asarray(scores, dtype=float)
        if not np.all(np.isfinite(scores)):
            raise PipelineError("non-finite score")
        return np.interp(scores, self.knots_x, self.knots_y)


@dataclass
class BaggedCalibrator:
    """Mean of bagged isotonic maps for one condition, plus its seeds."""

    bags: list[IsotonicMap]
    seed: int

    def predict(self, scores) -> np.ndarray:
        preds = np.stack([bag.predict(scores) for bag in self.bags])
        return preds.mean(axis=0)

    def predict_one(self, score: float) -> float:
        return float(self.predict([score])[0])

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "bags": [
                {"x": bag.knots_x.tolist(), "y": bag.knots_y.tolist()} for bag in self.bags
            ],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "BaggedCalibrator":
        bags = [
            IsotonicMap(np.asarray(b["x"]), np.asarray(b["y"])) for b in payload["bags"]
        ]
        return cls(bags=bags, seed=payload["seed"])


def fit_calibrator(scores, labels, n_bags: int = 10, seed: int = 0) -> BaggedCalibrator:
    """Fit bagged isotonic maps on bootstrap resamples of (scores, labels).

    Bag i draws its resample from ``default_rng([seed, i])``, same size with
    replacement, so calibrators are bit-reproducible from the master seed.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise PipelineError("scores and labels must be equal-length vectors")
    if np.any(scores < 0) or np.any(scores > 1):
        raise PipelineError("scores must lie in [0, 1]")
    if len(np.unique(labels)) < 2:
        raise PipelineError("need both classes to fit a calibrator")
    n = scores.size
    bags = []
    for i in range(n_bags):
        rng = np.random.default_rng([seed, i])
        idx = rng.integers(0, n, size=n)
        kx, ky = pav_fit(scores[idx], labels[idx])
        bags.append(IsotonicMap(kx, ky))
    return BaggedCalibrator(bags=bags, seed=seed)


def calibrate(cal: BaggedCalibrator, score: float) -> float:
    """Calibrated probability for a single raw score."""
    if not math.isfinite(score):
        raise PipelineError(f"cannot calibrate non-finite score {score!r}")
    return cal.predict_one(score)


def save_calibrators(calibrators: dict[str, BaggedCalibrator], path: str | Path):
    payload = {"conditions": {name: cal.to_dict() for name, cal in calibrators.items()}}
    Path(path).write_text(json.dumps(payload, indent=1) + "\n")


def load_calibrators(path: str | Path) -> dict[str, BaggedCalibrator]:
    payload = json.loads(Path(path).read_text())
    return {
        name: BaggedCalibrator.from_dict(entry)
        for name, entry in payload["conditions"].items()
    }
