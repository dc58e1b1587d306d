"""Discrimination, calibration, fairness, and prevalence-dependent metrics.

Probability bins are equal-width and right-closed with 1.0 in the top bin;
classification ties at the threshold count as positive. Equalized odds is
reported as the max TPR/FPR gap between groups (difference semantics), with
the ratio variant available alongside.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class MetricError(ValueError):
    pass


@dataclass
class ScoredSet:
    """Probability scores with binary labels, optional group tags."""

    scores: np.ndarray
    labels: np.ndarray
    group: np.ndarray | None = None
    threshold: float = 0.5

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=float)
        self.labels = np.asarray(self.labels)
        if self.scores.shape != self.labels.shape:
            raise MetricError("scores and labels must have equal length")
        if not np.isin(self.labels, (0, 1)).all():
            raise MetricError("labels must be 0/1")
        self.labels = self.labels.astype(np.int64)
        if self.group is not None:
            self.group = np.asarray(self.group)
            if self.group.shape != self.scores.shape:
                raise MetricError("group column must match scores length")

    @property
    def n(self) -> int:
        return self.scores.size


def roc_auc(s: ScoredSet) -> float:
    """Mann-Whitney statistic: (wins + ties/2) / (positives * negatives)."""
    pos = s.scores[s.labels == 1]
    neg = s.scores[s.labels == 0]
    if pos.size == 0 or neg.size == 0:
        raise MetricError("ROC-AUC needs both classes present")
    # rank-sum formulation with midranks for ties
    combined = np.concatenate([neg, pos])
    order = np.argsort(combined, kind="stable")
    ranks = np.empty(combined.size, dtype=float)
    sorted_vals = combined[order]
    i = 0
    while i < sorted_vals.size:
        j = i
        while j + 1 < sorted_vals.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2 + 1
        i = j + 1
    pos_rank_sum = ranks[neg.size :].sum()
    wins_plus_half_ties = pos_rank_sum - pos.size * (pos.size + 1) / 2
    return float(wins_plus_half_ties / (pos.size * neg.size))


def _bin_indices(scores: np.ndarray, m: int) -> np.ndarray:
    # right-closed bins ((k-1)/m, k/m]; score 0 joins the bottom bin
    idx = np.ceil(scores * m).astype(int) - 1
    return np.clip(idx, 0, m - 1)


def _bin_stats(s: ScoredSet, m: int):
    if s.n == 0:
        raise MetricError("empty input")
    idx = _bin_indices(s.scores, m)
    stats = []
    for b in range(m):
        mask = idx == b
        count = int(mask.sum())
        if count == 0:
            continue
        stats.append((float(s.scores[mask].mean()), float(s.labels[mask].mean()), count))
    return stats


def ece(s: ScoredSet, m: int = 10) -> float:
    """Expected calibration error over nonempty equal-width bins."""
    return float(
        sum(count / s.n * abs(mean - rate) for mean, rate, count in _bin_stats(s, m))
    )


def mce(s: ScoredSet, m: int = 10) -> float:
    """Maximum calibration error over nonempty equal-width bins."""
    return float(max(abs(mean - rate) for mean, rate, count in _bin_stats(s, m)))


def calibration_curve(s: ScoredSet, m: int = 10) -> list[tuple[float, float, int]]:
    """(bin mean score, bin positive rate, bin count) for plotting."""
    return _bin_stats(s, m)


def brier(s: ScoredSet) -> float:
    if s.n == 0:
        raise MetricError("empty input")
    return float(np.mean((s.scores - s.labels) ** 2))


def _confusion(scores, labels, threshold):
    pred = scores >= threshold
    tp = int(np.sum(pred & (labels == 1)))
    fp = int(np.sum(pred & (labels == 0)))
    tn = int(np.sum(~pred & (labels == 0)))
    fn = int(np.sum(~pred & (labels == 1)))
    return tp, fp, tn, fn


def _rates(scores, labels, threshold):
    tp, fp, tn, fn = _confusion(scores, labels, threshold)
    if tp + fn == 0 or fp + tn == 0:
        raise MetricError("group missing a class; rates undefined")
    return tp / (tp + fn), fp / (fp + tn)


def equalized_odds_difference(s: ScoredSet, threshold: float | None = None) -> float:
    """max(|TPR gap|, |FPR gap|) between the two groups at the threshold."""
    tprs, fprs = _group_rates(s, threshold)
    return float(max(abs(tprs[0] - tprs[1]), abs(fprs[0] - fprs[1])))


def equalized_odds_ratio(s: ScoredSet, threshold: float | None = None) -> float:
    """min(TPR ratio, FPR ratio) between groups; the ratio-semantics variant."""
    tprs, fprs = _group_rates(s, threshold)

    def ratio(a, b):
        hi, lo = max(a, b), min(a, b)
        return lo / hi if hi > 0 else 1.0

    return float(min(ratio(*tprs), ratio(*fprs)))


def _group_rates(s: ScoredSet, threshold):
    if s.group is None:
        raise MetricError("group column required")
    threshold = s.threshold if threshold is None else threshold
    groups = sorted(np.unique(s.group).tolist())
    if len(groups) != 2:
        raise MetricError(f"expected exactly 2 groups, got {len(groups)}")
    tprs, fprs = [], []
    for g in groups:
        mask = s.group == g
        tpr, fpr = _rates(s.scores[mask], s.labels[mask], threshold)
        tprs.append(tpr)
        fprs.append(fpr)
    return tprs, fprs


def prevalence_metrics(s: ScoredSet, threshold: float = 0.5) -> dict[str, float]:
    """PPV, NPV and likelihood ratios at the threshold; inf flags, never NaN."""
    if not ((s.labels == 1).any() and (s.labels == 0).any()):
        raise MetricError("need both classes present")
    tp, fp, tn, fn = _confusion(s.scores, s.labels, threshold)
    sens = tp / (tp + fn)
    spec = tn / (tn + fp)
    ppv = tp / (tp + fp) if tp + fp else float("nan")
    npv = tn / (tn + fn) if tn + fn else float("nan")
    lr_plus = sens / (1 - spec) if spec < 1 else float("inf")
    lr_minus = (1 - sens) / spec if spec > 0 else float("inf")
    return {
        "ppv": float(ppv),
        "npv": float(npv),
        "lr_plus": float(lr_plus),
        "lr_minus": float(lr_minus),
    }


def pearson_r(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size != y.size or x.size < 2:
        raise MetricError("need two equal-length vectors of length >= 2")
    xd = x - x.mean()
    yd = y - y.mean()
    sx = float(np.sqrt(np.sum(xd**2)))
    sy = float(np.sqrt(np.sum(yd**2)))
    if sx == 0 or sy == 0:
        raise MetricError("zero variance input")
    return float(np.clip(np.sum(xd * yd) / (sx * sy), -1.0, 1.0))


@dataclass
class FairnessReport:
    """Per-group discrimination plus between-group calibration/outcome gaps."""

    groups: list
    n: dict = field(default_factory=dict)
    auc: dict = field(default_factory=dict)
    ece_difference: float = 0.0
    brier_difference: float = 0.0
    equalized_odds: float = 0.0

    def to_dict(self) -> dict:
        return {
            "groups": list(self.groups),
            "n": dict(self.n),
            "auc": dict(self.auc),
            "ece_difference": self.ece_difference,
            "brier_difference": self.brier_difference,
            "equalized_odds_difference": self.equalized_odds,
        }


def fairness_report(s: ScoredSet, threshold: float | None = None, m: int = 10) -> FairnessReport:
    """Table-style fairness battery for a two-group scored set."""
    if s.group is None:
        raise MetricError("group column required")
    threshold = s.threshold if threshold is None else threshold
    groups = sorted(np.unique(s.group).tolist())
    if len(groups) != 2:
        raise MetricError(f"expected exactly 2 groups, got {len(groups)}")
    report = FairnessReport(groups=groups)
    per_group = {}
    for g in groups:
        mask = s.group == g
        sub = ScoredSet(s.scores[mask], s.labels[mask], threshold=threshold)
        per_group[g] = sub
        report.n[g] = sub.n
        report.auc[g] = roc_auc(sub)
    a, b = (per_group[g] for g in groups)
    report.ece_difference = abs(ece(a, m) - ece(b, m))
    report.brier_difference = abs(brier(a) - brier(b))
    report.equalized_odds = equalized_odds_difference(s, threshold)
    return report
