"""End-to-end plumbing: discretization, training tables, batch scoring.

Batch queries reuse the factor algebra by giving evidence factors an extra
leading pseudo-variable for the record index; elimination then runs once,
vectorized over all records, instead of once per record.
"""

from __future__ import annotations

import numpy as np

from . import model
from .data import DataError, DatasetTable
from .graph import BayesNet, Factor, factor_product
from .inference import InconsistentEvidenceError, min_fill_order, _eliminate
from .metrics import ScoredSet, brier, ece, fairness_report, prevalence_metrics, roc_auc
from .pipeline import QuartileBinner, BaggedCalibrator

RECORD_VAR = "__record__"


def score_column(surrogate: str) -> str:
    return f"{surrogate}-score"


def fit_binner(table: DatasetTable) -> QuartileBinner:
    """Quartile boundaries for every surrogate score column in the table."""
    binner = QuartileBinner(boundaries={})
    for node in model.SURROGATES:
        column = score_column(node)
        if column not in table.continuous:
            raise DataError(f"missing surrogate score column {column!r}")
        binner.fit(node, table.continuous[column])
    return binner


def discretize(table: DatasetTable, binner: QuartileBinner) -> DatasetTable:
    """Add a 4-state quartile column (named by surrogate node) per score column."""
    discrete = dict(table.discrete)
    domains = dict(table.domains)
    for node in model.SURROGATES:
        discrete[node] = binner.transform(node, table.continuous[score_column(node)])
        domains[node] = model.SEVERITY_STATES
    return DatasetTable(
        domains=domains, discrete=discrete, continuous=dict(table.continuous), ids=table.ids
    )


def training_table(table: DatasetTable) -> DatasetTable:
    """Restrict to the network's node columns (all must be present)."""
    spec = model.assessment_network()
    names = spec.node_names()
    missing = [n for n in names if n not in table.discrete]
    if missing:
        raise DataError(f"dataset missing network columns {missing}")
    return DatasetTable(
        domains={n: table.domains[n] for n in names},
        discrete={n: table.discrete[n] for n in names},
    )


# --- batch inference ---------------------------------------------------------

def _batch_evidence_factor(
    cpd_table: np.ndarray, scope: tuple[str, ...], evidence_cols: dict[str, np.ndarray], n: int
) -> Factor:
    arr = cpd_table
    var_axes = list(scope)
    observed = [v for v in scope if v in evidence_cols]
    first = observed[0]
    axis = var_axes.index(first)
    arr = np.moveaxis(arr, axis, 0)[evidence_cols[first]]
    var_axes.remove(first)
    var_axes.insert(0, RECORD_VAR)
    for v in observed[1:]:
        axis = var_axes.index(v)
        col = evidence_cols[v].reshape((n,) + (1,) * (arr.ndim - 1))
        arr = np.take_along_axis(arr, col, axis=axis)
        arr = np.squeeze(arr, axis=axis)
        var_axes.remove(v)
    return Factor(tuple(var_axes), arr)


def batch_marginals(
    net: BayesNet, evidence_cols: dict[str, np.ndarray], query: list[str]
) -> dict[str, np.ndarray]:
    """Per-record posterior marginals for each query node.

    evidence_cols maps an observed node to its per-record state-index column;
    returns node -> array of shape (n records, cardinality).
    """
    if not evidence_cols:
        raise DataError("batch query needs at least one evidence column")
    evidence_cols = {k: np.asarray(v, dtype=np.int64) for k, v in evidence_cols.items()}
    n = len(next(iter(evidence_cols.values())))
    factors = []
    for node in net.spec.node_names():
        cpd = net.cpds[node]
        scope = (node, *cpd.parents)
        if any(v in evidence_cols for v in scope):
            factors.append(_batch_evidence_factor(cpd.table, scope, evidence_cols, n))
        else:
            factors.append(Factor(scope, cpd.table))
    out = {}
    for q in query:
        order = min_fill_order(
            [f.scope for f in factors], keep={q, RECORD_VAR}
        )
        remaining = _eliminate(factors, order)
        result = None
        scalar = 1.0
        for f in remaining:
            if f.scope:
                result = f if result is None else factor_product(result, f)
            else:
                scalar *= float(f.values)
        arr = np.asarray(result.values, dtype=float) * scalar
        if result.scope == (q,):
            arr = np.broadcast_to(arr, (n, len(arr)))
        elif result.scope == (RECORD_VAR, q):
            pass
        elif result.scope == (q, RECORD_VAR):
            arr = arr.T
        else:
            raise DataError(f"unexpected residual scope {result.scope}")
        norms = arr.sum(axis=1, keepdims=True)
        if np.any(~(norms > 0)) or not np.all(np.isfinite(norms)):
            raise InconsistentEvidenceError("evidence probability zero for some record")
        out[q] = arr / norms
    return out


def surrogate_evidence_columns(
    table: DatasetTable, families: tuple[str, ...] | None = None
) -> dict[str, np.ndarray]:
    """Quartile evidence columns, optionally restricted to feature families."""
    cols = {}
    for node in model.SURROGATES:
        if families is not None and model.SURROGATE_FAMILY[node] not in families:
            continue
        cols[node] = table.discrete[node]
    return cols


def condition_scores(
    net: BayesNet, table: DatasetTable, families: tuple[str, ...] | None = None
) -> dict[str, np.ndarray]:
    """Raw P(condition present | surrogate evidence) per record."""
    evidence = surrogate_evidence_columns(table, families)
    marginals = batch_marginals(net, evidence, list(model.CONDITIONS))
    return {c: marginals[c][:, 1] for c in model.CONDITIONS}


def symptom_presence_scores(
    net: BayesNet, table: DatasetTable, families: tuple[str, ...] | None = None
) -> dict[str, np.ndarray]:
    """P(severity >= 2 | surrogate evidence) per symptom per record."""
    evidence = surrogate_evidence_columns(table, families)
    marginals = batch_marginals(net, evidence, list(model.SYMPTOMS))
    return {s: marginals[s][:, 2:].sum(axis=1) for s in model.SYMPTOMS}


# --- targets and evaluation --------------------------------------------------

def condition_labels(table: DatasetTable, condition: str) -> np.ndarray:
    """Compound target labels: 1 present, 0 absent, -1 undefined."""
    total_col = "phq8_total" if condition == model.DEPRESSION else "gad7_total"
    totals = table.continuous[total_col]
    diagnosis = table.discrete["diagnosis"].astype(bool)
    # vectorized form of condition_target over the whole table
    labels = np.full(table.n_rows, -1, dtype=np.int64)
    labels[(totals >= 10) & diagnosis] = 1
    labels[(totals < 10) & ~diagnosis] = 0
    return labels


def evaluation_report(
    net: BayesNet,
    table: DatasetTable,
    calibrators: dict[str, BaggedCalibrator] | None = None,
    threshold: float = 0.5,
    group_columns: tuple[str, ...] = (),
    bins: int = 10,
) -> dict:
    """Discrimination / calibration / fairness / prevalence battery."""
    raw = condition_scores(net, table)
    report: dict = {"threshold": threshold, "conditions": {}, "symptoms": {}}
    for condition in model.CONDITIONS:
        labels = condition_labels(table, condition)
        defined = labels >= 0
        scores = raw[condition][defined]
        y = labels[defined]
        entry = {
            "n": int(defined.sum()),
            "roc_auc": roc_auc(ScoredSet(scores, y)),
            "ece": ece(ScoredSet(scores, y), m=bins),
            "brier": brier(ScoredSet(scores, y)),
        }
        cal_scores = None
        if calibrators and condition in calibrators:
            cal_scores = calibrators[condition].predict(scores)
            entry["roc_auc_calibrated"] = roc_auc(ScoredSet(cal_scores, y))
            entry["ece_calibrated"] = ece(ScoredSet(cal_scores, y), m=bins)
            entry["brier_calibrated"] = brier(ScoredSet(cal_scores, y))
        used = cal_scores if cal_scores is not None else scores
        entry["prevalence_metrics"] = prevalence_metrics(
            ScoredSet(used, y), threshold=threshold
        )
        entry["fairness"] = {}
        for column in group_columns:
            groups = np.asarray(table.labels(column))[defined]
            fr = fairness_report(
                ScoredSet(used, y, group=groups, threshold=threshold), m=bins
            )
            entry["fairness"][column] = fr.to_dict()
        report["conditions"][condition] = entry

    presence = symptom_presence_scores(net, table)
    for symptom in model.SYMPTOMS:
        truth = (table.discrete[symptom] >= 2).astype(np.int64)
        entry = {"roc_auc": roc_auc(ScoredSet(presence[symptom], truth))}
        per_surrogate = {}
        for node in model.symptom_surrogates(symptom):
            col = score_column(node)
            if col in table.continuous:
                per_surrogate[node] = roc_auc(ScoredSet(
                    np.clip(table.continuous[col], 0.0, 1.0), truth
                ))
        entry["surrogate_roc_auc"] = per_surrogate
        report["symptoms"][symptom] = entry
    return report
