"""Synthetic cohort generation at the statistical regime of the target domain.

The generator is deliberately independent of the inference network: condition
states come from a bivariate Bernoulli with configurable prevalence and
comorbidity, symptom severities from condition-conditional ordinal
distributions, and each surrogate score from a two-Gaussian location family
whose separation is chosen to hit that surrogate's reference ROC-AUC
(d = sqrt(2) * ppf(auc)), squashed to [0, 1] by a logistic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit
from scipy.stats import norm

from . import model
from .data import DatasetTable
from .graph import BayesNet, topological_order


class GeneratorError(ValueError):
    pass


DEFAULT_GROUPS = {
    "sex": {"female": 0.66, "male": 0.34},
    "age_group": {"<35": 0.48, ">=35": 0.52},
}

# ordinal severity profiles; sharpness 1.0 uses these as-is, 0.0 is uniform
SEVERITY_WHEN_PRESENT = (0.10, 0.20, 0.35, 0.35)
SEVERITY_WHEN_ABSENT = (0.60, 0.25, 0.10, 0.05)


@dataclass
class GeneratorConfig:
    n: int = 30000
    seed: int = 0
    prevalence_depression: float = 0.30
    prevalence_anxiety: float = 0.30
    comorbidity: float = 0.42  # target P(anxiety present | depression present)
    severity_sharpness: float = 1.0
    surrogate_auc: dict[str, float] = field(
        default_factory=lambda: dict(model.SURROGATE_TARGET_AUC)
    )
    group_fractions: dict[str, dict[str, float]] = field(
        default_factory=lambda: {k: dict(v) for k, v in DEFAULT_GROUPS.items()}
    )
    diagnosis_noise: float = 0.05
    cross_symptom_leak: float = 0.0  # optional violation of per-symptom independence
    id_start: int = 0

    def __post_init__(self):
        for p in (
            self.prevalence_depression,
            self.prevalence_anxiety,
            self.comorbidity,
            self.diagnosis_noise,
        ):
            if not 0 <= p <= 1:
                raise GeneratorError(f"probability {p} outside [0, 1]")
        if not 0 <= self.severity_sharpness <= 1:
            raise GeneratorError("severity sharpness must be in [0, 1]")
        for name, auc in self.surrogate_auc.items():
            if not 0.5 < auc < 1.0:
                raise GeneratorError(f"target AUC for {name!r} must be in (0.5, 1.0)")

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "seed": self.seed,
            "prevalence_depression": self.prevalence_depression,
            "prevalence_anxiety": self.prevalence_anxiety,
            "comorbidity": self.comorbidity,
            "severity_sharpness": self.severity_sharpness,
            "surrogate_auc": dict(self.surrogate_auc),
            "group_fractions": {k: dict(v) for k, v in self.group_fractions.items()},
            "diagnosis_noise": self.diagnosis_noise,
            "cross_symptom_leak": self.cross_symptom_leak,
            "id_start": self.id_start,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "GeneratorConfig":
        return cls(**payload)


def forward_sample(net: BayesNet, n: int, seed: int) -> DatasetTable:
    """Ancestral sampling of n i.i.d. records in topological order."""
    rng = np.random.default_rng(seed)
    order = topological_order(net.spec)
    columns: dict[str, np.ndarray] = {}
    for node in order:
        cpd = net.cpds[node]
        card = cpd.child_cardinality
        table2d = cpd.table.reshape(card, -1)
        if cpd.parents:
            parent_cards = tuple(net.cardinality(p) for p in cpd.parents)
            flat = np.ravel_multi_index(
                tuple(columns[p] for p in cpd.parents), parent_cards
            )
        else:
            flat = np.zeros(n, dtype=np.int64)
        cdf = np.cumsum(table2d, axis=0)
        u = rng.random(n)
        columns[node] = (u[None, :] > cdf[:, flat]).sum(axis=0).astype(np.int64)
    domains = {name: net.spec.node(name).state_labels for name in order}
    ordered = {name: columns[name] for name in net.spec.node_names()}
    return DatasetTable(domains={k: domains[k] for k in ordered}, discrete=ordered)


def surrogate_score(
    present: np.ndarray | bool, target_auc: float, rng: np.random.Generator
) -> np.ndarray:
    """Scores in [0, 1] whose class separation yields the target ROC-AUC."""
    if not 0.5 < target_auc < 1.0:
        raise GeneratorError("target AUC must be in (0.5, 1.0)")
    present = np.atleast_1d(np.asarray(present, dtype=float))
    d = np.sqrt(2.0) * norm.ppf(target_auc)
    z = rng.normal(loc=present * d, scale=1.0)
    return expit(z - d / 2)


def _severity_dists(sharpness: float) -> tuple[np.ndarray, np.ndarray]:
    uniform = np.full(4, 0.25)
    present = sharpness * np.array(SEVERITY_WHEN_PRESENT) + (1 - sharpness) * uniform
    absent = sharpness * np.array(SEVERITY_WHEN_ABSENT) + (1 - sharpness) * uniform
    return absent, present


def _sample_categorical(rng, probs: np.ndarray, n: int) -> np.ndarray:
    cdf = np.cumsum(probs)
    return (rng.random(n)[:, None] > cdf[None, :]).sum(axis=1).astype(np.int64)


def sample_cohort(config: GeneratorConfig) -> DatasetTable:
    """Draw a full synthetic cohort table (conditions through demographics)."""
    rng = np.random.default_rng(config.seed)
    n = config.n
    p_dep = config.prevalence_depression
    p_anx = config.prevalence_anxiety
    c = config.comorbidity

    joint = c * p_dep  # P(dep & anx)
    if joint > min(p_dep, p_anx) + 1e-12:
        raise GeneratorError("comorbidity target exceeds the Frechet upper bound")
    q = (p_anx - joint) / (1 - p_dep) if p_dep < 1 else 0.0
    if not 0 <= q <= 1:
        raise GeneratorError("comorbidity target infeasible for the given prevalences")

    dep = (rng.random(n) < p_dep).astype(np.int64)
    anx_prob = np.where(dep == 1, c, q)
    anx = (rng.random(n) < anx_prob).astype(np.int64)

    absent_dist, present_dist = _severity_dists(config.severity_sharpness)
    severities: dict[str, np.ndarray] = {}
    for symptom in model.SYMPTOMS:
        cond = dep if model.SYMPTOM_CONDITION[symptom] == model.DEPRESSION else anx
        sev = np.empty(n, dtype=np.int64)
        for state, dist in ((0, absent_dist), (1, present_dist)):
            mask = cond == state
            sev[mask] = _sample_categorical(rng, dist, int(mask.sum()))
        severities[symptom] = sev

    phq8 = sum(severities[s] for s in model.DEPRESSION_SYMPTOMS)
    gad7 = sum(severities[s] for s in model.ANXIETY_SYMPTOMS)

    any_condition = (dep | anx).astype(bool)
    flip = rng.random(n) < config.diagnosis_noise
    diagnosis = (any_condition ^ flip).astype(np.int64)

    load = None
    if config.cross_symptom_leak > 0:
        total = (phq8 + gad7).astype(float)
        load = (total - total.mean()) / (total.std() or 1.0)

    scores: dict[str, np.ndarray] = {}
    for node in model.SURROGATES:
        symptom = model.SURROGATE_SYMPTOM[node]
        present = severities[symptom] >= 2
        auc = config.surrogate_auc[node]
        d = np.sqrt(2.0) * norm.ppf(auc)
        z = rng.normal(loc=present.astype(float) * d, scale=1.0)
        if load is not None:
            z = z + config.cross_symptom_leak * load
        scores[f"{node}-score"] = expit(z - d / 2)

    discrete = {
        model.DEPRESSION: dep,
        model.ANXIETY: anx,
        **severities,
        "diagnosis": diagnosis,
    }
    domains = {
        model.DEPRESSION: model.CONDITION_STATES,
        model.ANXIETY: model.CONDITION_STATES,
        **{s: model.SEVERITY_STATES for s in model.SYMPTOMS},
        "diagnosis": ("no", "yes"),
    }
    for column, fractions in config.group_fractions.items():
        labels = tuple(fractions)
        probs = np.array([fractions[label] for label in labels], dtype=float)
        if abs(probs.sum() - 1.0) > 1e-9:
            raise GeneratorError(f"group fractions for {column!r} must sum to 1")
        discrete[column] = _sample_categorical(rng, probs, n)
        domains[column] = labels

    continuous = {**scores, "phq8_total": phq8.astype(float), "gad7_total": gad7.astype(float)}
    ids = np.arange(config.id_start, config.id_start + n, dtype=np.int64)
    return DatasetTable(
        domains={k: domains[k] for k in discrete},
        discrete=discrete,
        continuous=continuous,
        ids=ids,
    )
