"""Discrete Bayesian network representation and the factor algebra behind inference.

Networks are immutable once built: ``NodeSpec``, ``NetworkSpec``, ``TabularCPD``
and ``Factor`` are frozen dataclasses wrapping read-only numpy arrays, so they
can be shared freely across threads and sessions.

CPD tables are stored with the child state on axis 0 and parents (in declared
order) on the remaining axes; serialized tables flatten the parent axes
row-major so files are bit-stable.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

PROB_TOL = 1e-9


class GraphError(ValueError):
    """Structural problem with a network (cycle, unknown node, bad scope)."""


@dataclass(frozen=True)
class NodeSpec:
    """A discrete network variable with at least two named states."""

    name: str
    state_labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.state_labels) < 2:
            raise GraphError(f"node {self.name!r} needs >= 2 states")
        if len(set(self.state_labels)) != len(self.state_labels):
            raise GraphError(f"node {self.name!r} has duplicate state labels")

    @property
    def cardinality(self) -> int:
        return len(self.state_labels)


@dataclass(frozen=True)
class NetworkSpec:
    """DAG skeleton: nodes plus directed (parent, child) edges."""

    nodes: tuple[NodeSpec, ...]
    edges: tuple[tuple[str, str], ...]

    def __post_init__(self):
        names = [n.name for n in self.nodes]
        if len(set(names)) != len(names):
            raise GraphError("duplicate node names")
        known = set(names)
        seen = set()
        for parent, child in self.edges:
            if parent not in known or child not in known:
                raise GraphError(f"edge ({parent}, {child}) references unknown node")
            if parent == child:
                raise GraphError(f"self-loop on {parent!r}")
            if (parent, child) in seen:
                raise GraphError(f"duplicate edge ({parent}, {child})")
            seen.add((parent, child))
        topological_order(self)  # raises on cycles

    def node(self, name: str) -> NodeSpec:
        try:
            return next(n for n in self.nodes if n.name == name)
        except StopIteration:
            raise GraphError(f"unknown node {name!r}") from None

    def cardinality(self, name: str) -> int:
        return self.node(name).cardinality

    def node_names(self) -> list[str]:
        return [n.name for n in self.nodes]

    def parents(self, name: str) -> list[str]:
        self.node(name)
        return [p for p, c in self.edges if c == name]

    def children(self, name: str) -> list[str]:
        self.node(name)
        return [c for p, c in self.edges if p == name]


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.asarray(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class TabularCPD:
    """P(child | parents) as an array of shape (child card, *parent cards)."""

    child: str
    parents: tuple[str, ...]
    table: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "table", _readonly(self.table))

    @property
    def child_cardinality(self) -> int:
        return self.table.shape[0]

    def column_sums(self) -> np.ndarray:
        return self.table.sum(axis=0)

    def to_factor(self, spec: NetworkSpec) -> Factor:
        scope = (self.child, *self.parents)
        cards = tuple(spec.cardinality(v) for v in scope)
        if self.table.shape != cards:
            raise GraphError(
                f"CPD for {self.child!r} has shape {self.table.shape}, expected {cards}"
            )
        return Factor(scope, self.table)


@dataclass(frozen=True)
class Factor:
    """Nonnegative table over a set of variables; the unit of elimination algebra."""

    scope: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(self.values))
        if self.values.ndim != len(self.scope):
            raise GraphError("factor rank does not match scope length")
        if np.any(self.values < 0):
            raise GraphError("factor has negative entries")

    def cardinality(self, var: str) -> int:
        return self.values.shape[self.scope.index(var)]


def _aligned(f: Factor, scope: list[str]) -> np.ndarray:
    """View of f.values broadcastable over the joint scope."""
    order = [f.scope.index(v) for v in scope if v in f.scope]
    arr = np.transpose(f.values, order)
    shape = [f.cardinality(v) if v in f.scope else 1 for v in scope]
    return arr.reshape(shape)


def factor_product(f: Factor, g: Factor) -> Factor:
    scope = list(f.scope) + [v for v in g.scope if v not in f.scope]
    for v in f.scope:
        if v in g.scope and f.cardinality(v) != g.cardinality(v):
            raise GraphError(f"cardinality mismatch on shared variable {v!r}")
    return Factor(tuple(scope), _aligned(f, scope) * _aligned(g, scope))


def factor_marginalize(f: Factor, var: str) -> Factor:
    if var not in f.scope:
        raise GraphError(f"{var!r} not in factor scope {f.scope}")
    axis = f.scope.index(var)
    scope = tuple(v for v in f.scope if v != var)
    return Factor(scope, f.values.sum(axis=axis))


def factor_reduce(f: Factor, var: str, state: int) -> Factor:
    if var not in f.scope:
        raise GraphError(f"{var!r} not in factor scope {f.scope}")
    axis = f.scope.index(var)
    if not 0 <= state < f.values.shape[axis]:
        raise GraphError(f"state {state} out of range for {var!r}")
    scope = tuple(v for v in f.scope if v != var)
    return Factor(scope, np.take(f.values, state, axis=axis))


def topological_order(spec: NetworkSpec) -> list[str]:
    """Parents-first node order; ties broken lexicographically by name."""
    indeg = {n.name: 0 for n in spec.nodes}
    children: dict[str, list[str]] = {n.name: [] for n in spec.nodes}
    for parent, child in spec.edges:
        indeg[child] += 1
        children[parent].append(child)
    ready = [name for name, d in indeg.items() if d == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        name = heapq.heappop(ready)
        order.append(name)
        for child in sorted(children[name]):
            indeg[child] -= 1
            if indeg[child] == 0:
                heapq.heappush(ready, child)
    if len(order) != len(spec.nodes):
        stuck = sorted(name for name, d in indeg.items() if d > 0)
        raise GraphError(f"cycle detected involving node {stuck[0]!r}")
    return order


@dataclass
class ValidationReport:
    """Accumulated diagnostics from validate_network; empty means valid."""

    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, message: str):
        self.violations.append(message)


def validate_network(spec: NetworkSpec, cpds: list[TabularCPD]) -> ValidationReport:
    """Check the parameterized network and report every violation found."""
    report = ValidationReport()
    try:
        topological_order(spec)
    except GraphError as exc:
        report.add(str(exc))

    by_child = {}
    for cpd in cpds:
        if cpd.child in by_child:
            report.add(f"duplicate CPD for node {cpd.child!r}")
        by_child[cpd.child] = cpd

    for node in spec.nodes:
        cpd = by_child.pop(node.name, None)
        if cpd is None:
            report.add(f"missing CPD for node {node.name!r}")
            continue
        expected_parents = tuple(spec.parents(node.name))
        if sorted(cpd.parents) != sorted(expected_parents):
            report.add(
                f"CPD for {node.name!r} declares parents {list(cpd.parents)}, "
                f"graph has {list(expected_parents)}"
            )
            continue
        cards = (node.cardinality, *(spec.cardinality(p) for p in cpd.parents))
        if cpd.table.shape != cards:
            report.add(
                f"CPD for {node.name!r} has shape {cpd.table.shape}, expected {cards}"
            )
            continue
        if np.any(cpd.table < -PROB_TOL) or np.any(cpd.table > 1 + PROB_TOL):
            report.add(f"CPD for {node.name!r} has entries outside [0, 1]")
        sums = cpd.column_sums()
        bad = np.argwhere(np.abs(sums - 1.0) > PROB_TOL)
        for idx in bad:
            config = dict(zip(cpd.parents, (int(i) for i in idx)))
            report.add(
                f"CPD column for {node.name!r} at parent configuration {config} "
                f"sums to {float(sums[tuple(idx)]):.12g}"
            )
    for extra in by_child:
        report.add(f"CPD for {extra!r} has no matching node")
    return report


class BayesNet:
    """A validated NetworkSpec plus its CPDs, ready for inference.

    ``isolated`` records do-isolated nodes and ``detached_observables`` their
    severed observation children; queries drop evidence on both.
    """

    def __init__(
        self,
        spec: NetworkSpec,
        cpds: list[TabularCPD],
        isolated: frozenset[str] = frozenset(),
        detached_observables: frozenset[str] = frozenset(),
    ):
        report = validate_network(spec, cpds)
        if not report.ok:
            raise GraphError("invalid network: " + "; ".join(report.violations))
        self.spec = spec
        self.cpds = {cpd.child: cpd for cpd in cpds}
        self.isolated = isolated
        self.detached_observables = detached_observables

    def factor(self, node: str) -> Factor:
        return self.cpds[node].to_factor(self.spec)

    def cardinality(self, node: str) -> int:
        return self.spec.cardinality(node)

    def state_index(self, node: str, label: str) -> int:
        labels = self.spec.node(node).state_labels
        try:
            return labels.index(label)
        except ValueError:
            raise GraphError(f"unknown state {label!r} for node {node!r}") from None


# --- serialization -----------------------------------------------------------

def network_to_dict(net: BayesNet) -> dict:
    spec = net.spec
    return {
        "nodes": [{"name": n.name, "states": list(n.state_labels)} for n in spec.nodes],
        "edges": [[p, c] for p, c in spec.edges],
        "cpds": [
            {
                "child": cpd.child,
                "parents": list(cpd.parents),
                "table": cpd.table.reshape(cpd.table.shape[0], -1).tolist(),
            }
            for cpd in (net.cpds[name] for name in spec.node_names())
        ],
    }


def network_from_dict(payload: dict) -> BayesNet:
    spec = NetworkSpec(
        nodes=tuple(
            NodeSpec(entry["name"], tuple(entry["states"])) for entry in payload["nodes"]
        ),
        edges=tuple((p, c) for p, c in payload["edges"]),
    )
    cpds = []
    for entry in payload["cpds"]:
        parents = tuple(entry["parents"])
        cards = tuple(spec.cardinality(p) for p in parents)
        child_card = spec.cardinality(entry["child"])
        table = np.asarray(entry["table"], dtype=float).reshape((child_card, *cards))
        cpds.append(TabularCPD(entry["child"], parents, table))
    return BayesNet(spec, cpds)


def save_network(net: BayesNet, path: str | Path):
    Path(path).write_text(json.dumps(network_to_dict(net), indent=1) + "\n")


def load_network(path: str | Path) -> BayesNet:
    return network_from_dict(json.loads(Path(path).read_text()))
