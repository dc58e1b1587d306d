"""Exact inference: variable elimination, do-isolation, severity scoring.

Queries never mutate the network. ``apply_do`` returns a mutilated copy in
which each intervened node keeps only its pre-intervention prior marginal:
incoming and outgoing edges are cut, each former child's CPD absorbs the cut
parent by averaging over that prior, and evidence on the node (or on
observation leaves it leaves behind) is dropped by downstream queries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .graph import (
    BayesNet,
    Factor,
    GraphError,
    NetworkSpec,
    TabularCPD,
    factor_marginalize,
    factor_product,
    factor_reduce,
)

EvidenceMap = dict[str, int]


class InconsistentEvidenceError(ValueError):
    """The supplied evidence has probability zero under the network."""


@dataclass
class PosteriorReport:
    """Per-node posterior state distributions plus the query context."""

    marginals: dict[str, np.ndarray]
    evidence: EvidenceMap = field(default_factory=dict)
    interventions: tuple[str, ...] = ()

    def __getitem__(self, node: str) -> np.ndarray:
        return self.marginals[node]


def _check_evidence(net: BayesNet, evidence: EvidenceMap, query: set[str]):
    for node, state in evidence.items():
        card = net.cardinality(node)  # raises on unknown node
        if not 0 <= int(state) < card:
            raise GraphError(f"state {state} out of range for node {node!r}")
        if node in query:
            raise GraphError(f"node {node!r} cannot be both query and evidence")


def effective_evidence(net: BayesNet, evidence: EvidenceMap) -> EvidenceMap:
    """Evidence with entries on isolated nodes and their detached leaves removed."""
    ignored = net.isolated | net.detached_observables
    return {k: int(v) for k, v in evidence.items() if k not in ignored}


def _reduced_factors(net: BayesNet, evidence: EvidenceMap) -> list[Factor]:
    factors = []
    for node in net.spec.node_names():
        f = net.factor(node)
        for var, state in evidence.items():
            if var in f.scope:
                f = factor_reduce(f, var, state)
        factors.append(f)
    return factors


def min_fill_order(scopes: list[tuple[str, ...]], keep: set[str]) -> list[str]:
    """Elimination order by the min-fill heuristic, lexicographic tie-break."""
    neighbors: dict[str, set[str]] = {}
    for scope in scopes:
        for v in scope:
            neighbors.setdefault(v, set()).update(set(scope) - {v})
    remaining = set(neighbors) - keep
    order = []
    while remaining:
        best_var, best_fill = None, None
        for v in sorted(remaining):
            nb = sorted(neighbors[v] & (remaining | keep))
            fill = sum(
                1 for a, b in combinations(nb, 2) if b not in neighbors[a]
            )
            if best_fill is None or fill < best_fill:
                best_var, best_fill = v, fill
        nb = neighbors[best_var]
        for a in nb:
            neighbors[a] |= nb - {a}
            neighbors[a].discard(best_var)
        del neighbors[best_var]
        remaining.discard(best_var)
        order.append(best_var)
    return order


def _eliminate(factors: list[Factor], order: list[str]) -> list[Factor]:
    factors = list(factors)
    for var in order:
        bucket = [f for f in factors if var in f.scope]
        if not bucket:
            continue
        product = bucket[0]
        for f in bucket[1:]:
            product = factor_product(product, f)
        factors = [f for f in factors if var not in f.scope]
        factors.append(factor_marginalize(product, var))
    return factors


def _single_marginal(factors: list[Factor], node: str, order: list[str] | None = None) -> np.ndarray:
    if order is None:
        order = min_fill_order([f.scope for f in factors], keep={node})
    remaining = _eliminate(factors, order)
    result = None
    scalar = 1.0
    for f in remaining:
        if f.scope:
            result = f if result is None else factor_product(result, f)
        else:
            scalar *= float(f.values)
    if result is None:
        raise GraphError(f"query node {node!r} does not appear in any factor")
    values = np.asarray(result.values, dtype=float) * scalar
    norm = values.sum()
    if not norm > 0 or not np.isfinite(norm):
        raise InconsistentEvidenceError(
            "evidence has probability zero under the network"
        )
    return values / norm


def eliminate_variables(
    net: BayesNet, query: set[str] | list[str], evidence: EvidenceMap | None = None
) -> PosteriorReport:
    """Exact conditional marginals P(node | evidence) for each query node."""
    query = set(query)
    evidence = effective_evidence(net, evidence or {})
    for node in query:
        net.cardinality(node)
    _check_evidence(net, evidence, query)
    factors = _reduced_factors(net, evidence)
    marginals = {}
    for node in sorted(query):
        marginals[node] = _single_marginal(factors, node)
    return PosteriorReport(
        marginals=marginals, evidence=dict(evidence), interventions=tuple(sorted(net.isolated))
    )


def brute_force_joint(
    net: BayesNet,
    query: set[str] | list[str],
    evidence: EvidenceMap | None = None,
    max_states: int = 2**24,
) -> PosteriorReport:
    """Oracle inference by full joint enumeration; small networks only."""
    query = set(query)
    evidence = effective_evidence(net, evidence or {})
    for node in query:
        net.cardinality(node)
    _check_evidence(net, evidence, query)
    total = 1
    for node in net.spec.node_names():
        total *= net.cardinality(node)
    if total > max_states:
        raise GraphError(f"joint state space {total} exceeds limit {max_states}")

    joint = Factor((), np.array(1.0))
    for node in net.spec.node_names():
        joint = factor_product(joint, net.factor(node))
    for var, state in evidence.items():
        joint = factor_reduce(joint, var, state)
    marginals = {}
    for node in sorted(query):
        f = joint
        for var in joint.scope:
            if var != node:
                f = factor_marginalize(f, var)
        norm = f.values.sum()
        if not norm > 0 or not np.isfinite(norm):
            raise InconsistentEvidenceError(
                "evidence has probability zero under the network"
            )
        marginals[node] = f.values / norm
    return PosteriorReport(
        marginals=marginals, evidence=dict(evidence), interventions=tuple(sorted(net.isolated))
    )


# --- interventions -----------------------------------------------------------

def observation_children(spec: NetworkSpec, node: str) -> list[str]:
    """Leaf children whose only parent is `node` (its dedicated observables)."""
    return [
        c
        for c in spec.children(node)
        if spec.parents(c) == [node] and not spec.children(c)
    ]


def apply_do(
    net: BayesNet,
    interventions: set[str] | list[str],
    strict_values: dict[str, int] | None = None,
) -> BayesNet:
    """Mutilate the network for a set of do-interventions.

    Default semantics is full isolation (see module docstring). Passing
    ``strict_values`` switches to textbook do-semantics for those nodes:
    only incoming edges are cut and the node is fixed to the given state.
    """
    interventions = set(interventions)
    strict_values = dict(strict_values or {})
    for node in interventions:
        net.cardinality(node)
    if not interventions:
        return net
    unknown_strict = set(strict_values) - interventions
    if unknown_strict:
        raise GraphError(f"strict values given for non-intervened nodes {sorted(unknown_strict)}")

    priors = {
        node: eliminate_variables(net, {node})[node]
        for node in interventions
        if node not in strict_values
    }

    spec = net.spec
    cpds = {name: net.cpds[name] for name in spec.node_names()}
    detached = set(net.detached_observables)
    edges = list(spec.edges)

    for node in sorted(interventions):
        if node in strict_values:
            state = int(strict_values[node])
            card = spec.cardinality(node)
            if not 0 <= state < card:
                raise GraphError(f"state {state} out of range for node {node!r}")
            point = np.zeros(card)
            point[state] = 1.0
            edges = [(p, c) for p, c in edges if c != node]
            cpds[node] = TabularCPD(node, (), point)
            continue

        detached.update(observation_children(spec, node))
        prior = priors[node]
        # contract against current CPDs: an already-isolated child may have
        # dropped this parent earlier in the loop
        for child in [c for c, cpd in cpds.items() if node in cpd.parents]:
            cpd = cpds[child]
            axis = 1 + cpd.parents.index(node)
            table = np.tensordot(cpd.table, prior, axes=([axis], [0]))
            # tensordot appends no axis; remaining parent order is preserved
            parents = tuple(p for p in cpd.parents if p != node)
            cpds[child] = TabularCPD(child, parents, table)
        edges = [(p, c) for p, c in edges if p != node and c != node]
        cpds[node] = TabularCPD(node, (), prior)

    new_spec = NetworkSpec(nodes=spec.nodes, edges=tuple(edges))
    return BayesNet(
        new_spec,
        list(cpds.values()),
        isolated=net.isolated | (interventions - set(strict_values)),
        detached_observables=frozenset(detached),
    )


# --- assessment-level queries ------------------------------------------------

def query_conditions(
    net: BayesNet,
    evidence: EvidenceMap | None = None,
    interventions: set[str] | None = None,
    condition_nodes: tuple[str, str] = ("Depression", "Anxiety"),
) -> tuple[float, float]:
    """Uncalibrated P(condition = last state | evidence, do(interventions))."""
    if interventions:
        net = apply_do(net, interventions)
    report = eliminate_variables(net, set(condition_nodes), evidence or {})
    return tuple(float(report[c][-1]) for c in condition_nodes)


def expected_severity(
    net: BayesNet,
    evidence: EvidenceMap | None = None,
    interventions: set[str] | None = None,
    symptom_groups: dict[str, tuple[str, ...]] | None = None,
) -> tuple[dict[str, float], dict[str, float]]:
    """Posterior-expected ordinal severity per symptom, summed per condition.

    symptom_groups maps a condition name to its symptom nodes; defaults to
    the assessment network's grouping.
    """
    if symptom_groups is None:
        from .model import ANXIETY, ANXIETY_SYMPTOMS, DEPRESSION, DEPRESSION_SYMPTOMS

        symptom_groups = {DEPRESSION: DEPRESSION_SYMPTOMS, ANXIETY: ANXIETY_SYMPTOMS}
    if interventions:
        net = apply_do(net, interventions)
    symptoms = [s for group in symptom_groups.values() for s in group]
    report = eliminate_variables(net, set(symptoms), evidence or {})
    per_symptom = {
        s: float(np.dot(np.arange(len(report[s])), report[s])) for s in symptoms
    }
    totals = {
        condition: float(sum(per_symptom[s] for s in group))
        for condition, group in symptom_groups.items()
    }
    return per_symptom, totals


def symptom_contributions(
    net: BayesNet,
    evidence: EvidenceMap | None = None,
    interventions: set[str] | None = None,
    symptoms: tuple[str, ...] | None = None,
    condition_nodes: tuple[str, str] = ("Depression", "Anxiety"),
) -> dict[str, dict[str, float]]:
    """Per-symptom shift in condition probability attributable to its observables.

    contribution(s) = P(condition | evidence) - P(condition | evidence with
    s's observation-leaf evidence removed). Symptoms with no observed
    observables contribute exactly 0.
    """
    if symptoms is None:
        from .model import SYMPTOMS

        symptoms = SYMPTOMS
    if interventions:
        net = apply_do(net, interventions)
    evidence = effective_evidence(net, evidence or {})
    base = query_conditions(net, evidence, condition_nodes=condition_nodes)
    out = {}
    for s in symptoms:
        observed = [c for c in observation_children(net.spec, s) if c in evidence]
        if not observed and s not in net.isolated:
            out[s] = {c: 0.0 for c in condition_nodes}
            continue
        pruned = {k: v for k, v in evidence.items() if k not in observed}
        alt = query_conditions(net, pruned, condition_nodes=condition_nodes)
        out[s] = {c: base[i] - alt[i] for i, c in enumerate(condition_nodes)}
    return out
