"""CPD estimation from fully observed discrete data.

The Bayesian estimator spreads an equivalent sample size uniformly over each
node's (child state x parent configuration) cells as Dirichlet pseudo counts;
posterior probabilities are (pseudo + observed) / column total. An MLE
estimator is kept as the zero-prior baseline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import DataError, DatasetTable
from .graph import NetworkSpec, TabularCPD


@dataclass(frozen=True)
class EssConfig:
    """Equivalent sample size for the uniform Dirichlet prior."""

    equivalent_sample_size: float = 8000.0

    def __post_init__(self):
        if not self.equivalent_sample_size > 0:
            raise ValueError("equivalent sample size must be > 0")


def _counts(spec: NetworkSpec, data: DatasetTable, node: str) -> np.ndarray:
    """Joint (child, parents...) occurrence counts, child on axis 0."""
    parents = spec.parents(node)
    cards = (spec.cardinality(node), *(spec.cardinality(p) for p in parents))
    cols = []
    for name in (node, *parents):
        if name not in data.discrete:
            raise DataError(f"network node {name!r} missing from dataset")
        domain = data.domains[name]
        expected = spec.node(name).state_labels
        if tuple(domain) != tuple(expected):
            raise DataError(
                f"column {name!r} domain {domain} does not match node states {expected}"
            )
        cols.append(data.discrete[name])
    if data.n_rows == 0:
        return np.zeros(cards)
    flat = np.ravel_multi_index(tuple(cols), cards)
    return np.bincount(flat, minlength=int(np.prod(cards))).reshape(cards).astype(float)


def fit_bdeu(spec: NetworkSpec, data: DatasetTable, ess: EssConfig) -> list[TabularCPD]:
    """Posterior CPDs under a uniform-pseudo-count prior of total mass `ess`."""
    cpds = []
    for node in spec.node_names():
        parents = tuple(spec.parents(node))
        counts = _counts(spec, data, node)
        pseudo = ess.equivalent_sample_size / counts.size
        table = counts + pseudo
        table /= table.sum(axis=0, keepdims=True)
        cpds.append(TabularCPD(node, parents, table))
    return cpds


def fit_mle(spec: NetworkSpec, data: DatasetTable) -> list[TabularCPD]:
    """Relative-frequency CPDs; every parent configuration must be observed."""
    cpds = []
    for node in spec.node_names():
        parents = tuple(spec.parents(node))
        counts = _counts(spec, data, node)
        totals = counts.sum(axis=0, keepdims=True)
        empty = np.argwhere(totals[0] == 0) if counts.ndim > 1 else (
            [()] if totals.item() == 0 else []
        )
        for idx in empty:
            config = dict(zip(parents, (int(i) for i in np.atleast_1d(idx))))
            raise DataError(
                f"unobserved parent configuration {config} for node {node!r}"
            )
        cpds.append(TabularCPD(node, parents, counts / totals))
    return cpds
